#pragma once

#include <openssl/evp.h>
#include <openssl/opensslv.h>

#include <Eigen/Core>
#include <json.hpp>

#include <array>
#include <charconv>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "medspec/correspond.hpp"
#include "medspec/error.hpp"
#include "medspec/features.hpp"
#include "medspec/mesh.hpp"
#include "medspec/mesh_io.hpp"
#include "medspec/recon.hpp"
#include "medspec/segment.hpp"
#include "medspec/spectral.hpp"
#include "medspec/text_io.hpp"
#include "medspec/thinning.hpp"
#include "medspec/voxelize.hpp"

namespace medspec {

inline constexpr const char* kVersion = "0.1.0";

// ---- hashing ----------------------------------------------------------------

class Sha256 {
 public:
  Sha256() : ctx_(EVP_MD_CTX_new()) {
    if (!ctx_ || EVP_DigestInit_ex(ctx_, EVP_sha256(), nullptr) != 1) fail(ErrorCode::io, "SHA-256 init failed");
  }
  ~Sha256() { EVP_MD_CTX_free(ctx_); }
  Sha256(const Sha256&) = delete;
  Sha256& operator=(const Sha256&) = delete;

  Sha256& update(const void* data, std::size_t n) {
    if (EVP_DigestUpdate(ctx_, data, n) != 1) fail(ErrorCode::io, "SHA-256 update failed");
    return *this;
  }
  /// Length-prefixed, so consecutive fields cannot run into each other.
  Sha256& field(const std::string& s) {
    const std::uint64_t n = s.size();
    update(&n, sizeof n);
    return update(s.data(), s.size());
  }
  std::string hex() {
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    if (EVP_DigestFinal_ex(ctx_, md.data(), &len) != 1) fail(ErrorCode::io, "SHA-256 final failed");
    static const char* digits = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
      out += digits[md[i] >> 4];
      out += digits[md[i] & 15];
    }
    return out;
  }

 private:
  EVP_MD_CTX* ctx_;
};

inline std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::io, "cannot open " + path.string());
  Sha256 h;
  std::array<char, 1 << 16> buf{};
  while (in) {
    in.read(buf.data(), buf.size());
    if (in.gcount() > 0) h.update(buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  return h.hex();
}

// ---- configuration ------------------------------------------------------------

struct PipelineConfig {
  int resolution = 128;
  double tau = 0.25;
  bool canonical_pose = true;
  int graph_K = 16;
  double epsilon = 1e-6;
  int k = 30;
  std::string rho = "radius";
  std::string correspondence_mode = "nearest";
  double align_alpha = 0.4, align_beta = 0.3, align_gamma = 0.3;
  int segment_parts = 4;
  int segment_subspaces = 8;
  std::uint64_t segment_seed = 7;
  int segment_spectral_columns = 1;
  bool segment_eigen_weighting = true;
  double segment_regularization = 0.01;
  int gsc_k = 8;
};

namespace detail {

[[noreturn]] inline void bad_field(const std::string& key, const std::string& why) {
  fail(ErrorCode::validation, "config field '" + key + "': " + why);
}

template <typename T>
T parse_field(const std::string& key, const std::string& value) {
  T out{};
  const char* end = value.data() + value.size();
  auto res = std::from_chars(value.data(), end, out);
  if (res.ec != std::errc{} || res.ptr != end) bad_field(key, "cannot parse '" + value + "'");
  return out;
}

inline bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  bad_field(key, "expected true or false, got '" + value + "'");
}

template <typename T>
void check_range(const std::string& key, T v, T lo, T hi) {
  if (!(v >= lo && v <= hi)) {
    std::ostringstream msg;
    msg << "value " << v << " outside [" << lo << ", " << hi << "]";
    bad_field(key, msg.str());
  }
}

/// Shortest text that parses back to the same double.
inline std::string shortest(double v) {
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

}  // namespace detail

/// Flat key=value view, keys sorted; numbers printed round-trip exactly.
inline std::map<std::string, std::string> config_entries(const PipelineConfig& c) {
  using detail::shortest;
  auto b = [](bool v) { return std::string(v ? "true" : "false"); };
  return {
      {"align_alpha", shortest(c.align_alpha)},
      {"align_beta", shortest(c.align_beta)},
      {"align_gamma", shortest(c.align_gamma)},
      {"canonical_pose", b(c.canonical_pose)},
      {"correspondence_mode", c.correspondence_mode},
      {"epsilon", shortest(c.epsilon)},
      {"graph_K", std::to_string(c.graph_K)},
      {"gsc_k", std::to_string(c.gsc_k)},
      {"k", std::to_string(c.k)},
      {"resolution", std::to_string(c.resolution)},
      {"rho", c.rho},
      {"segment_eigen_weighting", b(c.segment_eigen_weighting)},
      {"segment_parts", std::to_string(c.segment_parts)},
      {"segment_regularization", shortest(c.segment_regularization)},
      {"segment_seed", std::to_string(c.segment_seed)},
      {"segment_spectral_columns", std::to_string(c.segment_spectral_columns)},
      {"segment_subspaces", std::to_string(c.segment_subspaces)},
      {"tau", shortest(c.tau)},
  };
}

/// Throws a validation error naming the first offending field.
inline void validate(const PipelineConfig& c) {
  using detail::check_range;
  check_range("resolution", c.resolution, 8, 512);
  check_range("tau", c.tau, 0.0, 1.0);
  check_range("graph_K", c.graph_K, 0, 256);
  if (!(c.epsilon > 0 && c.epsilon <= 1)) detail::bad_field("epsilon", "must lie in (0, 1]");
  check_range("k", c.k, 1, 500);
  if (c.rho != "radius" && c.rho != "volume") detail::bad_field("rho", "expected radius or volume");
  if (c.correspondence_mode != "nearest" && c.correspondence_mode != "drift")
    detail::bad_field("correspondence_mode", "expected nearest or drift");
  check_range("align_alpha", c.align_alpha, 0.0, 1e6);
  check_range("align_beta", c.align_beta, 0.0, 1e6);
  check_range("align_gamma", c.align_gamma, 0.0, 1e6);
  check_range("segment_parts", c.segment_parts, 2, 1000);
  check_range("segment_subspaces", c.segment_subspaces, 1, 256);
  check_range("segment_spectral_columns", c.segment_spectral_columns, -1, 500);
  check_range("segment_regularization", c.segment_regularization, 0.0, 100.0);
  check_range("gsc_k", c.gsc_k, 1, 100000);
}

inline void set_config_field(PipelineConfig& c, const std::string& key, const std::string& value) {
  using detail::parse_bool;
  using detail::parse_field;
  if (key == "resolution") c.resolution = parse_field<int>(key, value);
  else if (key == "tau") c.tau = parse_field<double>(key, value);
  else if (key == "canonical_pose") c.canonical_pose = parse_bool(key, value);
  else if (key == "graph_K") c.graph_K = parse_field<int>(key, value);
  else if (key == "epsilon") c.epsilon = parse_field<double>(key, value);
  else if (key == "k") c.k = parse_field<int>(key, value);
  else if (key == "rho") c.rho = value;
  else if (key == "correspondence_mode") c.correspondence_mode = value;
  else if (key == "align_alpha") c.align_alpha = parse_field<double>(key, value);
  else if (key == "align_beta") c.align_beta = parse_field<double>(key, value);
  else if (key == "align_gamma") c.align_gamma = parse_field<double>(key, value);
  else if (key == "segment_parts") c.segment_parts = parse_field<int>(key, value);
  else if (key == "segment_subspaces") c.segment_subspaces = parse_field<int>(key, value);
  else if (key == "segment_seed") c.segment_seed = parse_field<std::uint64_t>(key, value);
  else if (key == "segment_spectral_columns") c.segment_spectral_columns = parse_field<int>(key, value);
  else if (key == "segment_eigen_weighting") c.segment_eigen_weighting = parse_bool(key, value);
  else if (key == "segment_regularization") c.segment_regularization = parse_field<double>(key, value);
  else if (key == "gsc_k") c.gsc_k = parse_field<int>(key, value);
  else detail::bad_field(key, "unknown key");
}

inline std::string serialize_config(const PipelineConfig& c) {
  std::string out;
  for (const auto& [key, value] : config_entries(c)) out += key + '=' + value + '\n';
  return out;
}

/// Applies key=value lines ('#' comments, blank lines allowed) over `base`.
inline PipelineConfig parse_config(std::istream& in, PipelineConfig base = {}) {
  std::string line;
  int no = 0;
  while (std::getline(in, line)) {
    ++no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail(ErrorCode::validation, "config line " + std::to_string(no) + ": expected key=value");
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      const auto b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    set_config_field(base, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  validate(base);
  return base;
}

inline PipelineConfig load_config(const std::filesystem::path& path, PipelineConfig base = {}) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::io, "cannot open config " + path.string());
  return parse_config(in, base);
}

inline void save_config(const PipelineConfig& c, const std::filesystem::path& path) {
  auto out = open_output(path);
  out << serialize_config(c);
  if (!out) fail(ErrorCode::io, "write failed for " + path.string());
}

// ---- stages ---------------------------------------------------------------------

enum class Stage { voxelize, skeleton, reconstruct, spectral, correspond, segment, gsc, miou, all };

inline const char* to_string(Stage s) {
  switch (s) {
    case Stage::voxelize: return "voxelize";
    case Stage::skeleton: return "skeleton";
    case Stage::reconstruct: return "reconstruct";
    case Stage::spectral: return "spectral";
    case Stage::correspond: return "correspond";
    case Stage::segment: return "segment";
    case Stage::gsc: return "gsc";
    case Stage::miou: return "miou";
    case Stage::all: return "all";
  }
  return "?";
}

inline Stage parse_stage(const std::string& s) {
  for (Stage st : {Stage::voxelize, Stage::skeleton, Stage::reconstruct, Stage::spectral, Stage::correspond,
                   Stage::segment, Stage::gsc, Stage::miou, Stage::all})
    if (s == to_string(st)) return st;
  fail(ErrorCode::validation, "unknown stage '" + s + "'");
}

/// Artifact file names inside the output directory.
namespace artifact {
inline constexpr const char* grid = "grid.vox";
inline constexpr const char* skeleton = "skeleton.skel";
inline constexpr const char* recon = "recon.vox";
inline constexpr const char* embedding = "embedding.emb";
inline constexpr const char* signature = "signature.txt";
inline constexpr const char* labels = "labels.txt";
inline constexpr const char* features = "features.gsc";
inline constexpr const char* correspondence = "correspondence.txt";
inline constexpr const char* cache = "cache.json";
inline constexpr const char* target_dir = "target";
}  // namespace artifact

struct PipelineInputs {
  std::filesystem::path mesh;
  std::optional<std::filesystem::path> target;  ///< second mesh for correspond
  std::filesystem::path out_dir;
  std::optional<std::filesystem::path> manifest;  ///< default out_dir/manifest.json
};

struct StageRecord {
  std::string name;
  std::string status;  ///< ran | skipped | failed
  double seconds = 0.0;
  std::string key;
  std::vector<std::string> artifacts;
};

struct PipelineReport {
  std::vector<StageRecord> stages;
  std::optional<double> miou;
  std::filesystem::path manifest;
};

namespace detail {

/// One mesh's chain of stage products, loaded or computed on demand.
class Chain {
 public:
  Chain(const PipelineConfig& cfg, std::filesystem::path mesh_path, std::filesystem::path dir,
        std::vector<StageRecord>& log, std::string prefix)
      : cfg_(cfg), mesh_path_(std::move(mesh_path)), dir_(std::move(dir)), log_(log), prefix_(std::move(prefix)) {
    cache_path_ = dir_ / artifact::cache;
    if (std::filesystem::exists(cache_path_)) {
      std::ifstream in(cache_path_);
      try {
        cache_ = nlohmann::json::parse(in);
      } catch (const nlohmann::json::exception&) {
        cache_ = nlohmann::json::object();  // unreadable cache only costs a rerun
      }
    }
    if (!cache_.is_object()) cache_ = nlohmann::json::object();
  }

  const std::filesystem::path& dir() const { return dir_; }
  std::string input_hash() {
    if (input_hash_.empty()) input_hash_ = sha256_file(mesh_path_);
    return input_hash_;
  }

  /// Mesh as loaded (original coordinates).
  const TriangleMesh& original() {
    if (!original_) original_ = load_mesh(mesh_path_);
    return *original_;
  }
  /// Mesh in the frame used for voxelization.
  const TriangleMesh& posed() {
    if (!posed_) {
      if (cfg_.canonical_pose) {
        const RigidPose p = canonical_pose(original());
        posed_ = transformed(original(), p.rotation, p.translation);
      } else {
        posed_ = original();
      }
    }
    return *posed_;
  }

  // Stage keys chain the upstream keys, so any upstream change invalidates.
  std::string key(Stage s) {
    auto it = keys_.find(s);
    if (it != keys_.end()) return it->second;
    Sha256 h;
    h.field(to_string(s));
    auto cfgf = [&](const char* name) { h.field(name).field(config_entries(cfg_).at(name)); };
    switch (s) {
      case Stage::voxelize:
        h.field(input_hash());
        cfgf("resolution");
        cfgf("canonical_pose");
        break;
      case Stage::skeleton:
        h.field(upstream_key(Stage::voxelize, artifact::grid));
        cfgf("tau");
        break;
      case Stage::reconstruct:
        h.field(upstream_key(Stage::skeleton, artifact::skeleton));
        break;
      case Stage::spectral:
        h.field(input_hash());
        h.field(upstream_key(Stage::skeleton, artifact::skeleton));
        h.field(upstream_key(Stage::reconstruct, artifact::recon));
        cfgf("graph_K");
        cfgf("epsilon");
        cfgf("k");
        cfgf("rho");
        break;
      case Stage::segment:
        h.field(upstream_key(Stage::spectral, artifact::embedding));
        for (const char* f : {"segment_parts", "segment_subspaces", "segment_seed", "segment_spectral_columns",
                              "segment_eigen_weighting", "segment_regularization"})
          cfgf(f);
        break;
      case Stage::gsc:
        h.field(upstream_key(Stage::spectral, artifact::embedding));
        cfgf("gsc_k");
        break;
      default:
        fail(ErrorCode::precondition, std::string("no cache key for stage ") + to_string(s));
    }
    return keys_[s] = h.hex();
  }

  bool cached(Stage s, const std::vector<std::string>& files) {
    const std::string k = key(s);
    for (const auto& f : files) {
      const auto path = dir_ / f;
      if (!cache_.contains(f) || !std::filesystem::exists(path)) return false;
      const auto& entry = cache_[f];
      if (entry.value("key", "") != k || entry.value("sha256", "") != sha256_file(path)) return false;
    }
    return true;
  }

  void record(Stage s, const std::vector<std::string>& files) {
    for (const auto& f : files) cache_[f] = {{"key", key(s)}, {"sha256", sha256_file(dir_ / f)}, {"stage", to_string(s)}};
    auto out = open_output(cache_path_);
    out << cache_.dump(2) << '\n';
  }

  /// Runs `produce` unless every artifact is cached under the current key.
  void stage(Stage s, const std::vector<std::string>& files, const std::function<void()>& produce) {
    StageRecord rec;
    rec.name = prefix_ + to_string(s);
    rec.artifacts = files;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      rec.key = key(s);
      if (cached(s, files)) {
        rec.status = "skipped";
      } else {
        produce();
        record(s, files);
        rec.status = "ran";
      }
    } catch (...) {
      rec.status = "failed";
      rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      log_.push_back(rec);
      throw;
    }
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    log_.push_back(rec);
  }

  void require(const std::string& file, Stage producer) {
    if (!std::filesystem::exists(dir_ / file))
      fail(ErrorCode::dependency, "missing upstream artifact " + (dir_ / file).string() + " (run stage '" +
                                      to_string(producer) + "' or 'all')");
  }

  // ---- products ----

  const VoxelGrid& grid() {
    if (!grid_) {
      require(artifact::grid, Stage::voxelize);
      grid_ = load_grid(dir_ / artifact::grid);
    }
    return *grid_;
  }
  const SkeletalPointSet& skeleton() {
    if (!skel_) {
      require(artifact::skeleton, Stage::skeleton);
      skel_ = load_skeleton(dir_ / artifact::skeleton);
    }
    return *skel_;
  }
  /// Generators are not persisted; rasterizing again is deterministic.
  const ReconGrid& recon() {
    if (!recon_) {
      require(artifact::recon, Stage::reconstruct);
      recon_ = reconstruct(skeleton(), skeleton().geometry);
    }
    return *recon_;
  }
  const SpectralEmbedding& embedding() {
    if (!emb_) {
      require(artifact::embedding, Stage::spectral);
      emb_ = load_embedding(dir_ / artifact::embedding);
      if (emb_->n() != static_cast<Eigen::Index>(original().vertices.size()))
        fail(ErrorCode::shape, "embedding rows differ from the mesh vertex count");
    }
    return *emb_;
  }
  const std::vector<double>& radius() {
    if (!radius_) {
      const auto map = map_boundary_to_medial(posed(), skeleton(), recon());
      radius_ = vertex_radii(map, skeleton());
    }
    return *radius_;
  }

  void run_voxelize() {
    stage(Stage::voxelize, {artifact::grid}, [&] {
      grid_ = medspec::voxelize(posed(), cfg_.resolution);
      save_grid(*grid_, dir_ / artifact::grid);
    });
  }
  void run_skeleton() {
    stage(Stage::skeleton, {artifact::skeleton}, [&] {
      skel_ = extract_medial_surface(grid(), cfg_.tau);
      save_skeleton(*skel_, dir_ / artifact::skeleton);
    });
  }
  void run_reconstruct() {
    stage(Stage::reconstruct, {artifact::recon}, [&] {
      recon_ = reconstruct(skeleton(), skeleton().geometry);
      save_grid(recon_->grid, dir_ / artifact::recon);
    });
  }
  void run_spectral() {
    stage(Stage::spectral, {artifact::embedding, artifact::signature}, [&] {
      SpectralParams p;
      p.k = cfg_.k;
      p.graph.K = cfg_.graph_K;
      p.graph.epsilon = cfg_.epsilon;
      p.graph.mass = cfg_.rho == "volume" ? MassForm::volume : MassForm::radius;
      auto res = medial_spectral(posed(), skeleton(), recon(), p);
      save_embedding(res.embedding, dir_ / artifact::embedding);
      save_signature(res.signature, dir_ / artifact::signature);
      // Reload so downstream stages see exactly the persisted values.
      emb_ = load_embedding(dir_ / artifact::embedding);
      radius_ = res.radius;
    });
  }
  void run_segment() {
    stage(Stage::segment, {artifact::labels}, [&] {
      FeatureOptions fo;
      fo.spectral_columns = cfg_.segment_spectral_columns;
      fo.eigen_weighting = cfg_.segment_eigen_weighting;
      const auto f = augment_features(posed(), radius(), embedding(), fo);
      ClusterOptions co;
      co.seed = cfg_.segment_seed;
      co.regularization = cfg_.segment_regularization;
      save_labels(cluster(f, cfg_.segment_parts, cfg_.segment_subspaces, co), dir_ / artifact::labels);
    });
  }
  void run_gsc() {
    stage(Stage::gsc, {artifact::features}, [&] {
      export_features(gsc(original().vertices, embedding(), cfg_.gsc_k), std::nullopt, dir_ / artifact::features);
    });
  }

 private:
  std::string upstream_key(Stage s, const char* file) {
    // A present artifact without a cache entry (supplied by the user) is
    // keyed by its content.
    if (!std::filesystem::exists(dir_ / file) || (cache_.contains(file) && cache_[file].value("key", "") == key(s)))
      return key(s);
    if (!cache_.contains(file)) return "file:" + sha256_file(dir_ / file);
    return cache_[file].value("key", "");
  }

  const PipelineConfig& cfg_;
  std::filesystem::path mesh_path_, dir_, cache_path_;
  std::vector<StageRecord>& log_;
  std::string prefix_;
  nlohmann::json cache_ = nlohmann::json::object();
  std::map<Stage, std::string> keys_;
  std::string input_hash_;
  std::optional<TriangleMesh> original_, posed_;
  std::optional<VoxelGrid> grid_;
  std::optional<SkeletalPointSet> skel_;
  std::optional<ReconGrid> recon_;
  std::optional<SpectralEmbedding> emb_;
  std::optional<std::vector<double>> radius_;
};

inline nlohmann::json versions_json() {
  return {{"medspec", kVersion},
          {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                        std::to_string(EIGEN_MINOR_VERSION)},
          {"openssl", OPENSSL_VERSION_TEXT},
          {"compiler", __VERSION__}};
}

}  // namespace detail

/// Runs `stage` (and, for `all`, everything upstream of it) and writes the
/// manifest, also when a stage fails.
inline PipelineReport run_pipeline(const PipelineConfig& cfg, const PipelineInputs& in, Stage stage) {
  namespace fs = std::filesystem;
  PipelineReport report;
  report.manifest = in.manifest ? *in.manifest : in.out_dir / "manifest.json";
  nlohmann::json manifest = {{"tool", "medial"}, {"stage", to_string(stage)}, {"versions", detail::versions_json()}};
  nlohmann::json config = nlohmann::json::object();
  for (const auto& [key, value] : config_entries(cfg)) config[key] = value;
  manifest["config"] = config;
  manifest["inputs"] = nlohmann::json::array();

  auto write_manifest = [&](const nlohmann::json& error) {
    manifest["stages"] = nlohmann::json::array();
    for (const auto& r : report.stages)
      manifest["stages"].push_back(
          {{"name", r.name}, {"status", r.status}, {"seconds", r.seconds}, {"key", r.key}, {"artifacts", r.artifacts}});
    if (report.miou) manifest["miou"] = *report.miou;
    manifest["status"] = error.is_null() ? "ok" : "failed";
    manifest["error"] = error;
    auto out = open_output(report.manifest);
    out << manifest.dump(2) << '\n';
  };

  try {
    validate(cfg);
    if (in.out_dir.empty()) fail(ErrorCode::validation, "output directory not set");
    fs::create_directories(in.out_dir);
    if (!fs::exists(in.mesh)) fail(ErrorCode::io, "input mesh " + in.mesh.string() + " does not exist");
    manifest["inputs"].push_back({{"role", "mesh"}, {"path", in.mesh.string()}, {"sha256", sha256_file(in.mesh)}});
    if (in.target) {
      if (!fs::exists(*in.target)) fail(ErrorCode::io, "target mesh " + in.target->string() + " does not exist");
      manifest["inputs"].push_back(
          {{"role", "target"}, {"path", in.target->string()}, {"sha256", sha256_file(*in.target)}});
    }

    detail::Chain a(cfg, in.mesh, in.out_dir, report.stages, "");
    std::optional<detail::Chain> b;
    if (in.target) b.emplace(cfg, *in.target, in.out_dir / artifact::target_dir, report.stages, "target/");

    auto upstream = [&](detail::Chain& c) {
      c.run_voxelize();
      c.run_skeleton();
      c.run_reconstruct();
      c.run_spectral();
    };
    auto correspond = [&] {
      if (!b) fail(ErrorCode::dependency, "correspond needs a target mesh");
      StageRecord rec;
      rec.name = "correspond";
      rec.artifacts = {artifact::correspondence};
      const auto t0 = std::chrono::steady_clock::now();
      Sha256 h;
      h.field("correspond")
          .field(sha256_file(a.dir() / artifact::embedding))
          .field(sha256_file(b->dir() / artifact::embedding))
          .field(a.input_hash())
          .field(b->input_hash());
      for (const char* f : {"correspondence_mode", "align_alpha", "align_beta", "align_gamma"})
        h.field(f).field(config_entries(cfg).at(f));
      rec.key = h.hex();
      const fs::path out = in.out_dir / artifact::correspondence;
      const fs::path stamp = in.out_dir / "correspondence.key";
      bool hit = false;
      if (fs::exists(out) && fs::exists(stamp)) {
        std::ifstream s(stamp);
        std::string old, sum;
        s >> old >> sum;
        hit = old == rec.key && sum == sha256_file(out);
      }
      if (hit) {
        rec.status = "skipped";
      } else {
        try {
          AlignOptions ao;
          ao.alpha = cfg.align_alpha;
          ao.beta = cfg.align_beta;
          ao.gamma = cfg.align_gamma;
          const auto& ea = a.embedding();
          const auto& eb = b->embedding();
          const auto al = align_spectra(ea, eb, a.posed().vertices, b->posed().vertices, ao);
          const auto map = match_points(apply_alignment(ea, eb, al), parse_match_mode(cfg.correspondence_mode));
          save_correspondence(map, out);
          auto s = open_output(stamp);
          s << rec.key << ' ' << sha256_file(out) << '\n';
          rec.status = "ran";
        } catch (...) {
          rec.status = "failed";
          report.stages.push_back(rec);
          throw;
        }
      }
      rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      report.stages.push_back(rec);
    };

    switch (stage) {
      case Stage::voxelize: a.run_voxelize(); break;
      case Stage::skeleton: a.run_skeleton(); break;
      case Stage::reconstruct: a.run_reconstruct(); break;
      case Stage::spectral: a.run_spectral(); break;
      case Stage::segment: a.run_segment(); break;
      case Stage::gsc: a.run_gsc(); break;
      case Stage::correspond: correspond(); break;
      case Stage::miou: {
        StageRecord rec{"miou", "ran", 0.0, "", {}};
        const auto t0 = std::chrono::steady_clock::now();
        a.require(artifact::recon, Stage::reconstruct);
        report.miou = medspec::miou(a.grid(), load_grid(a.dir() / artifact::recon));
        rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        report.stages.push_back(rec);
        break;
      }
      case Stage::all:
        upstream(a);
        if (b) {
          upstream(*b);
          correspond();
        }
        a.run_segment();
        a.run_gsc();
        break;
    }
  } catch (const Error& e) {
    write_manifest({{"code", to_string(e.code())}, {"message", e.what()}});
    throw;
  } catch (const std::exception& e) {
    write_manifest({{"code", "internal"}, {"message", e.what()}});
    throw;
  }
  write_manifest(nullptr);
  return report;
}

}  // namespace medspec
