// radsentry-datagen: writes the bundled synthetic Safecast-style daily
// export used by the examples, tests and acceptance suite.

#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "radsentry/datagen.hpp"

int main(int argc, char** argv) {
  CLI::App app{"radsentry-datagen - synthetic Safecast-style export fixture"};
  std::string output;
  radsentry::DatasetSpec spec;
  app.add_option("--out", output, "output CSV path")->required();
  app.add_option("--normal-rows", spec.n_normal, "normal reading count");
  app.add_option("--zero-rows", spec.n_zero, "flat-zero attack rows");
  app.add_option("--near-zero-rows", spec.n_near_zero,
                 "near-zero attack rows");
  app.add_option("--high-rows", spec.n_high, "extreme-high attack rows");
  app.add_option("--cpm-rows", spec.n_cpm, "cpm-unit rows (filtered out)");
  app.add_option("--seed", spec.seed, "generator seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  std::ofstream out(output, std::ios::binary);
  if (!out) {
    std::cerr << "error: cannot open for writing: " << output << '\n';
    return 1;
  }
  radsentry::write_safecast_fixture(out, spec);
  std::cout << "wrote " << output << '\n';
  return 0;
}
