#include "radsentry/model_store.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>

#include "radsentry/error.hpp"

namespace radsentry {

namespace {

constexpr std::uint16_t kLeafMarker = 0xFFFF;
constexpr std::uint16_t kVersion = 1;

struct Writer {
  std::vector<std::uint8_t> bytes;

  void u16(std::uint16_t v) {
    bytes.push_back(static_cast<std::uint8_t>(v & 0xff));
    bytes.push_back(static_cast<std::uint8_t>(v >> 8));
  }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i)
      bytes.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
  }
  void i32(std::int32_t v) { u32(static_cast<std::uint32_t>(v)); }
  void f32(float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    u32(bits);
  }
};

struct Reader {
  const std::vector<std::uint8_t>& bytes;
  std::size_t pos = 0;

  void need(std::size_t n, const char* what) {
    if (pos + n > bytes.size())
      throw DecodeError(std::string("RDS1: truncated blob reading ") + what +
                        " at offset " + std::to_string(pos));
  }
  std::uint16_t u16(const char* what) {
    need(2, what);
    std::uint16_t v = static_cast<std::uint16_t>(
        bytes[pos] | (static_cast<std::uint16_t>(bytes[pos + 1]) << 8));
    pos += 2;
    return v;
  }
  std::uint32_t u32(const char* what) {
    need(4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
      v |= static_cast<std::uint32_t>(bytes[pos + i]) << (8 * i);
    pos += 4;
    return v;
  }
  std::int32_t i32(const char* what) {
    return static_cast<std::int32_t>(u32(what));
  }
  float f32(const char* what) {
    std::uint32_t bits = u32(what);
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
  }
};

// Emits the tree in pre-order, returning each node's position in the
// emitted array.
void emit_preorder(const GbdtTree& tree, int node, std::vector<int>& order) {
  order.push_back(node);
  const GbdtNode& nd = tree.nodes[node];
  if (!nd.is_leaf()) {
    emit_preorder(tree, nd.left, order);
    emit_preorder(tree, nd.right, order);
  }
}

}  // namespace

std::vector<std::uint8_t> export_compact(
    const GradientBoostedEnsemble& model) {
  if (model.retained_columns.size() > 0xFFFF)
    throw InvalidArgument("export: more than 65535 retained features");
  for (std::size_t c : model.retained_columns)
    if (c >= 0xFFFF)
      throw InvalidArgument("export: feature index " + std::to_string(c) +
                            " exceeds the 65535 format limit");
  if (model.trees.size() > 0xFFFF)
    throw InvalidArgument("export: more than 65535 trees");

  Writer w;
  w.bytes.reserve(64);
  w.bytes.insert(w.bytes.end(), {'R', 'D', 'S', '1'});
  w.u16(kVersion);
  w.f32(static_cast<float>(model.base_score));
  w.u16(static_cast<std::uint16_t>(model.retained_columns.size()));
  for (std::size_t c : model.retained_columns)
    w.u16(static_cast<std::uint16_t>(c));
  w.u16(static_cast<std::uint16_t>(model.trees.size()));

  std::vector<int> order;
  std::vector<int> position;
  for (const GbdtTree& tree : model.trees) {
    order.clear();
    emit_preorder(tree, 0, order);
    position.assign(tree.nodes.size(), -1);
    for (std::size_t i = 0; i < order.size(); ++i)
      position[order[i]] = static_cast<int>(i);

    w.u32(static_cast<std::uint32_t>(order.size()));
    for (int id : order) {
      const GbdtNode& nd = tree.nodes[id];
      if (nd.is_leaf()) {
        w.u16(kLeafMarker);
        w.f32(static_cast<float>(nd.leaf_value));
        w.i32(-1);
        w.i32(-1);
      } else {
        w.u16(static_cast<std::uint16_t>(nd.feature));
        w.f32(static_cast<float>(nd.threshold));
        w.i32(position[nd.left]);
        w.i32(position[nd.right]);
      }
    }
  }
  return w.bytes;
}

GradientBoostedEnsemble load_compact(const std::vector<std::uint8_t>& blob) {
  Reader r{blob};
  r.need(4, "magic");
  if (std::memcmp(blob.data(), "RDS1", 4) != 0)
    throw DecodeError("RDS1: bad magic, expected \"RDS1\"");
  r.pos = 4;
  const std::uint16_t version = r.u16("version");
  if (version != kVersion)
    throw DecodeError("RDS1: unsupported version " + std::to_string(version));

  GradientBoostedEnsemble model;
  model.base_score = static_cast<double>(r.f32("base_score"));
  const std::uint16_t n_retained = r.u16("feature count");
  model.retained_columns.resize(n_retained);
  std::size_t max_col = 0;
  for (std::uint16_t i = 0; i < n_retained; ++i) {
    model.retained_columns[i] = r.u16("feature map");
    max_col = std::max(max_col, model.retained_columns[i]);
  }
  model.n_original_features = n_retained ? max_col + 1 : 0;

  const std::uint16_t n_trees = r.u16("tree count");
  model.trees.resize(n_trees);
  for (std::uint16_t t = 0; t < n_trees; ++t) {
    const std::uint32_t n_nodes = r.u32("node count");
    if (n_nodes == 0)
      throw DecodeError("RDS1: tree " + std::to_string(t) + " has no nodes");
    GbdtTree& tree = model.trees[t];
    tree.nodes.resize(n_nodes);
    for (std::uint32_t i = 0; i < n_nodes; ++i) {
      GbdtNode& nd = tree.nodes[i];
      const std::uint16_t feature = r.u16("node feature");
      const float value = r.f32("node value");
      const std::int32_t left = r.i32("left child");
      const std::int32_t right = r.i32("right child");
      if (feature == kLeafMarker) {
        if (left != -1 || right != -1)
          throw DecodeError("RDS1: leaf node " + std::to_string(i) +
                            " of tree " + std::to_string(t) +
                            " has children");
        nd.leaf_value = static_cast<double>(value);
      } else {
        if (feature >= n_retained)
          throw DecodeError("RDS1: node feature " + std::to_string(feature) +
                            " out of range");
        // Pre-order layout: children always come after their parent.
        if (left <= static_cast<std::int32_t>(i) ||
            right <= static_cast<std::int32_t>(i) ||
            left >= static_cast<std::int32_t>(n_nodes) ||
            right >= static_cast<std::int32_t>(n_nodes))
          throw DecodeError("RDS1: child index out of range at node " +
                            std::to_string(i) + " of tree " +
                            std::to_string(t));
        nd.feature = feature;
        nd.threshold = static_cast<double>(value);
        nd.left = left;
        nd.right = right;
      }
    }
  }
  if (r.pos != blob.size())
    throw DecodeError("RDS1: " + std::to_string(blob.size() - r.pos) +
                      " trailing bytes after model data");
  return model;
}

void save_model(const std::string& path,
                const GradientBoostedEnsemble& model) {
  std::vector<std::uint8_t> blob = export_compact(model);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open for writing: " + path);
  out.write(reinterpret_cast<const char*>(blob.data()),
            static_cast<std::streamsize>(blob.size()));
  if (!out) throw Error("write failed: " + path);
}

GradientBoostedEnsemble load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open: " + path);
  std::vector<std::uint8_t> blob((std::istreambuf_iterator<char>(in)),
                                 std::istreambuf_iterator<char>());
  return load_compact(blob);
}

}  // namespace radsentry
