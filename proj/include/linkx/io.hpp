#pragma once

#include <charconv>
#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "linkx/graph.hpp"
#include "linkx/train.hpp"

namespace linkx {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr int kSchemaVersion = 1;

// Raised for malformed dataset files; carries file and 1-based line number.
class DatasetFormatError : public std::runtime_error {
 public:
  DatasetFormatError(std::string file, std::int64_t line, const std::string& msg)
      : std::runtime_error(file + ":" + std::to_string(line) + ": " + msg),
        file_(std::move(file)),
        line_(line) {}
  const std::string& file() const { return file_; }
  std::int64_t line() const { return line_; }

 private:
  std::string file_;
  std::int64_t line_;
};

namespace ioutil {

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline void write_file(const std::filesystem::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::int64_t parse_int(const std::string& file, std::int64_t line, std::string_view tok) {
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size())
    throw DatasetFormatError(file, line, "expected an integer, got '" + std::string(tok) + "'");
  return v;
}

inline double parse_double(const std::string& file, std::int64_t line, std::string_view tok) {
  double v = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size())
    throw DatasetFormatError(file, line, "expected a number, got '" + std::string(tok) + "'");
  return v;
}

inline std::vector<std::string_view> split_tabs(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    std::size_t tab = s.find('\t', start);
    if (tab == std::string_view::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, tab - start));
    start = tab + 1;
  }
}

// Strips one trailing '\r' so CRLF files load.
inline std::string_view chomp(std::string_view s) {
  if (!s.empty() && s.back() == '\r') s.remove_suffix(1);
  return s;
}

}  // namespace ioutil

// ---------------------------------------------------------------------------
// Dataset directory format:
//   edges.tsv    two tab-separated base-10 integers per line (src, dst)
//   labels.tsv   one integer per line; row i labels node i
//   features.tsv D tab-separated decimal floats per line; row i = node i
//   meta.json    n, directed, num_classes, feature_dim
// Undirected graphs store each edge once; loading rebuilds both directions.
// ---------------------------------------------------------------------------

inline void save_dataset(const std::filesystem::path& dir, const Dataset& data,
                         const nlohmann::json& provenance = nlohmann::json()) {
  std::filesystem::create_directories(dir);
  std::string edges;
  for (std::int32_t u = 0; u < data.graph.n; ++u) {
    for (std::int32_t v : data.graph.neighbors(u)) {
      if (!data.graph.directed && v < u) continue;
      edges += std::to_string(u);
      edges += '\t';
      edges += std::to_string(v);
      edges += '\n';
    }
  }
  ioutil::write_file(dir / "edges.tsv", edges);

  std::string labels;
  for (std::int32_t k : data.labels.values) {
    labels += std::to_string(k);
    labels += '\n';
  }
  ioutil::write_file(dir / "labels.tsv", labels);

  std::string feats;
  for (std::int32_t u = 0; u < data.graph.n; ++u) {
    for (std::int64_t d = 0; d < data.features.rows(); ++d) {
      if (d > 0) feats += '\t';
      feats += ioutil::format_double(data.features(d, u));
    }
    feats += '\n';
  }
  ioutil::write_file(dir / "features.tsv", feats);

  nlohmann::json meta{{"n", data.graph.n},
                      {"directed", data.graph.directed},
                      {"num_classes", data.labels.num_classes},
                      {"feature_dim", data.features.rows()}};
  if (!provenance.is_null()) meta["provenance"] = provenance;
  ioutil::write_file(dir / "meta.json", meta.dump(2) + "\n");
}

inline Dataset load_dataset(const std::filesystem::path& dir, bool symmetrize = false) {
  const auto meta_path = dir / "meta.json";
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(ioutil::read_file(meta_path));
  } catch (const nlohmann::json::parse_error& e) {
    throw DatasetFormatError(meta_path.string(), 1, std::string("invalid JSON: ") + e.what());
  }
  for (const char* field : {"n", "directed", "num_classes", "feature_dim"})
    if (!meta.contains(field))
      throw DatasetFormatError(meta_path.string(), 1, std::string("missing field '") + field + "'");
  const auto n = meta["n"].get<std::int32_t>();
  const bool directed = meta["directed"].get<bool>() && !symmetrize;
  const auto num_classes = meta["num_classes"].get<std::int32_t>();
  const auto feature_dim = meta["feature_dim"].get<std::int64_t>();
  if (n <= 0) throw DatasetFormatError(meta_path.string(), 1, "n must be positive");
  if (num_classes < 1) throw DatasetFormatError(meta_path.string(), 1, "num_classes must be >= 1");
  if (feature_dim < 0) throw DatasetFormatError(meta_path.string(), 1, "feature_dim must be >= 0");

  const auto edges_path = (dir / "edges.tsv").string();
  std::vector<Edge> edges;
  {
    std::istringstream in(ioutil::read_file(dir / "edges.tsv"));
    std::string line;
    std::int64_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      auto trimmed = ioutil::chomp(line);
      if (trimmed.empty()) continue;
      auto toks = ioutil::split_tabs(trimmed);
      if (toks.size() != 2)
        throw DatasetFormatError(edges_path, lineno, "expected two tab-separated integers");
      auto s = ioutil::parse_int(edges_path, lineno, toks[0]);
      auto d = ioutil::parse_int(edges_path, lineno, toks[1]);
      if (s < 0 || s >= n || d < 0 || d >= n)
        throw DatasetFormatError(edges_path, lineno, "node index out of range [0," + std::to_string(n) + ")");
      edges.emplace_back(static_cast<std::int32_t>(s), static_cast<std::int32_t>(d));
    }
  }

  const auto labels_path = (dir / "labels.tsv").string();
  Labels labels;
  labels.num_classes = num_classes;
  {
    std::istringstream in(ioutil::read_file(dir / "labels.tsv"));
    std::string line;
    std::int64_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      auto trimmed = ioutil::chomp(line);
      if (trimmed.empty()) continue;
      auto k = ioutil::parse_int(labels_path, lineno, trimmed);
      if (k < 0 || k >= num_classes)
        throw DatasetFormatError(labels_path, lineno,
                                 "label " + std::to_string(k) + " out of range [0," +
                                     std::to_string(num_classes) + ")");
      labels.values.push_back(static_cast<std::int32_t>(k));
    }
    if (static_cast<std::int32_t>(labels.values.size()) != n)
      throw DatasetFormatError(labels_path, lineno,
                               "expected " + std::to_string(n) + " labels, found " +
                                   std::to_string(labels.values.size()));
  }

  const auto feats_path = (dir / "features.tsv").string();
  DenseMatrix features(feature_dim, n);
  {
    std::istringstream in(ioutil::read_file(dir / "features.tsv"));
    std::string line;
    std::int64_t lineno = 0;
    std::int32_t node = 0;
    while (std::getline(in, line)) {
      ++lineno;
      auto trimmed = ioutil::chomp(line);
      if (trimmed.empty()) continue;
      if (node >= n) throw DatasetFormatError(feats_path, lineno, "more feature rows than nodes");
      auto toks = ioutil::split_tabs(trimmed);
      if (static_cast<std::int64_t>(toks.size()) != feature_dim)
        throw DatasetFormatError(feats_path, lineno,
                                 "expected " + std::to_string(feature_dim) + " values, found " +
                                     std::to_string(toks.size()));
      for (std::int64_t d = 0; d < feature_dim; ++d) {
        double v = ioutil::parse_double(feats_path, lineno, toks[static_cast<std::size_t>(d)]);
        if (!std::isfinite(v)) throw DatasetFormatError(feats_path, lineno, "non-finite feature value");
        features(d, node) = v;
      }
      ++node;
    }
    if (node != n)
      throw DatasetFormatError(feats_path, lineno,
                               "expected " + std::to_string(n) + " feature rows, found " +
                                   std::to_string(node));
  }

  Dataset data;
  data.graph = build_graph(edges, n, directed);
  data.features = std::move(features);
  data.labels = std::move(labels);
  return data;
}

// FNV-1a 64 over the four dataset files (name, NUL, contents) in fixed order.
inline std::uint64_t dataset_checksum(const std::filesystem::path& dir) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  auto absorb = [&h](std::string_view s) {
    for (unsigned char ch : s) {
      h ^= ch;
      h *= 0x100000001b3ull;
    }
  };
  for (const char* name : {"edges.tsv", "features.tsv", "labels.tsv", "meta.json"}) {
    absorb(name);
    absorb(std::string_view("\0", 1));
    absorb(ioutil::read_file(dir / name));
  }
  return h;
}

inline std::string checksum_hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016" PRIx64, h);
  return buf;
}

// ---------------------------------------------------------------------------
// Checkpoints: a directory holding meta.json (model kind, dims, seed, split,
// recorded metrics, parameter manifest) and params.bin (the parameter
// tensors, row-major little-endian doubles, concatenated in the order listed
// in meta.json).
// ---------------------------------------------------------------------------

namespace ioutil {

inline void append_le_double(std::string& out, double v) {
  std::uint64_t bits;
  static_assert(sizeof(bits) == sizeof(v));
  std::memcpy(&bits, &v, sizeof(bits));
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

inline double read_le_double(const std::string& in, std::size_t offset) {
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i)
    bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[offset + i])) << (8 * i);
  double v;
  std::memcpy(&v, &bits, sizeof(v));
  return v;
}

}  // namespace ioutil

struct CheckpointInfo {
  ModelSnapshot snapshot;
  Metric metric = Metric::accuracy;
  std::uint64_t seed = 0;        // training root seed
  std::uint64_t split_seed = 0;
  int split_index = 0;
  int split_count = 5;
  std::int32_t n = 0;
  std::int64_t feature_dim = 0;
  std::int32_t num_classes = 0;
  int hops = 1;
  int prop_iterations = 50;
  bool link_bias = false;
  PropNorm normalization = PropNorm::sym;
  std::string dataset_checksum;
  double recorded_test_metric = 0.0;
};

inline void save_checkpoint(const std::filesystem::path& dir, const CheckpointInfo& info) {
  std::filesystem::create_directories(dir);
  nlohmann::json params = nlohmann::json::array();
  std::string blob;
  for (const auto& [name, mat] : info.snapshot.params) {
    params.push_back({{"name", name}, {"rows", mat.rows()}, {"cols", mat.cols()}});
    for (std::size_t i = 0; i < mat.size(); ++i) ioutil::append_le_double(blob, mat.data()[i]);
  }
  nlohmann::json meta{
      {"schema_version", kSchemaVersion},
      {"tool_version", kToolVersion},
      {"model", model_kind_name(info.snapshot.kind)},
      {"metric", info.metric == Metric::accuracy ? "accuracy" : "auc"},
      {"seed", info.seed},
      {"split", {{"seed", info.split_seed}, {"index", info.split_index}, {"count", info.split_count}}},
      {"dims", {{"n", info.n}, {"feature_dim", info.feature_dim}, {"num_classes", info.num_classes}}},
      {"point",
       {{"hidden", info.snapshot.point.hidden},
        {"layers", info.snapshot.point.layers},
        {"lr", info.snapshot.point.lr},
        {"weight_decay", info.snapshot.point.weight_decay},
        {"alpha", info.snapshot.point.alpha}}},
      {"hops", info.hops},
      {"prop_iterations", info.prop_iterations},
      {"link_bias", info.link_bias},
      {"normalization", info.normalization == PropNorm::sym ? "sym" : "row"},
      {"dataset_checksum", info.dataset_checksum},
      {"recorded_test_metric", info.recorded_test_metric},
      {"params", params}};
  ioutil::write_file(dir / "meta.json", meta.dump(2) + "\n");
  ioutil::write_file(dir / "params.bin", blob);
}

inline CheckpointInfo load_checkpoint(const std::filesystem::path& dir) {
  nlohmann::json meta = nlohmann::json::parse(ioutil::read_file(dir / "meta.json"));
  CheckpointInfo info;
  info.snapshot.kind = model_kind_from_name(meta.at("model").get<std::string>());
  info.metric = meta.at("metric").get<std::string>() == "auc" ? Metric::roc_auc : Metric::accuracy;
  info.seed = meta.at("seed").get<std::uint64_t>();
  info.split_seed = meta.at("split").at("seed").get<std::uint64_t>();
  info.split_index = meta.at("split").at("index").get<int>();
  info.split_count = meta.at("split").at("count").get<int>();
  info.n = meta.at("dims").at("n").get<std::int32_t>();
  info.feature_dim = meta.at("dims").at("feature_dim").get<std::int64_t>();
  info.num_classes = meta.at("dims").at("num_classes").get<std::int32_t>();
  info.snapshot.point.hidden = meta.at("point").at("hidden").get<std::int64_t>();
  info.snapshot.point.layers = meta.at("point").at("layers").get<int>();
  info.snapshot.point.lr = meta.at("point").at("lr").get<double>();
  info.snapshot.point.weight_decay = meta.at("point").at("weight_decay").get<double>();
  info.snapshot.point.alpha = meta.at("point").at("alpha").get<double>();
  info.hops = meta.at("hops").get<int>();
  info.prop_iterations = meta.at("prop_iterations").get<int>();
  info.link_bias = meta.at("link_bias").get<bool>();
  info.normalization = meta.at("normalization").get<std::string>() == "row" ? PropNorm::row : PropNorm::sym;
  info.dataset_checksum = meta.at("dataset_checksum").get<std::string>();
  info.recorded_test_metric = meta.at("recorded_test_metric").get<double>();

  std::string blob = ioutil::read_file(dir / "params.bin");
  std::size_t offset = 0;
  for (const auto& p : meta.at("params")) {
    DenseMatrix mat(p.at("rows").get<std::int64_t>(), p.at("cols").get<std::int64_t>());
    if (offset + 8 * mat.size() > blob.size())
      throw std::runtime_error("checkpoint params.bin truncated");
    for (std::size_t i = 0; i < mat.size(); ++i) {
      mat.data()[i] = ioutil::read_le_double(blob, offset);
      offset += 8;
    }
    info.snapshot.params.emplace_back(p.at("name").get<std::string>(), std::move(mat));
  }
  if (offset != blob.size()) throw std::runtime_error("checkpoint params.bin has trailing bytes");
  return info;
}

}  // namespace linkx
