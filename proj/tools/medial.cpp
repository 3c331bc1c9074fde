// medial: command-line front end for the medial-spectral pipeline.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <map>
#include <string>

#include "medspec/correspond.hpp"
#include "medspec/error.hpp"
#include "medspec/features.hpp"
#include "medspec/mesh_io.hpp"
#include "medspec/pipeline.hpp"
#include "medspec/recon.hpp"
#include "medspec/segment.hpp"
#include "medspec/spectral.hpp"
#include "medspec/thinning.hpp"
#include "medspec/voxelize.hpp"

namespace {

using namespace medspec;
namespace fs = std::filesystem;

// Flags that mirror config keys. After parsing, the config file is applied
// first and explicitly given flags override it.
class ConfigFlags {
 public:
  void bind(CLI::Option* opt, std::string key) { opts_.emplace_back(opt, std::move(key)); }
  void bind_negated(CLI::Option* flag, std::string key) { negated_.emplace_back(flag, std::move(key)); }

  /// Range checks are left to the caller so `run` can record them in its manifest.
  PipelineConfig resolve(const std::string& config_file) const {
    PipelineConfig cfg = config_file.empty() ? PipelineConfig{} : load_config(config_file);
    for (const auto& [opt, key] : opts_)
      if (opt->count() > 0) set_config_field(cfg, key, opt->as<std::string>());
    for (const auto& [opt, key] : negated_)
      if (opt->count() > 0) set_config_field(cfg, key, "false");
    return cfg;
  }

 private:
  std::vector<std::pair<CLI::Option*, std::string>> opts_, negated_;
};

TriangleMesh posed_mesh(const fs::path& path, bool pose) {
  TriangleMesh mesh = load_mesh(path);
  if (!pose) return mesh;
  const RigidPose p = canonical_pose(mesh);
  return transformed(mesh, p.rotation, p.translation);
}

std::vector<double> mesh_radii(const TriangleMesh& mesh, const SkeletalPointSet& skel) {
  const ReconGrid recon = reconstruct(skel, skel.geometry);
  return vertex_radii(map_boundary_to_medial(mesh, skel, recon), skel);
}

int run(int argc, char** argv) {
  CLI::App app{"Medial surfaces, medially weighted spectral coordinates, and their uses"};
  app.require_subcommand(1);
  std::string config_file;
  app.add_option("--config", config_file, "key=value configuration file")->check(CLI::ExistingFile);
  ConfigFlags flags;
  std::function<void(const PipelineConfig&)> action;
  bool validated_by_action = false;
  struct {
    std::string in, out, a, b, mesh, skel, emb, sig, map, scalars, mesh_a, mesh_b, gt, feat, points, dir, target, manifest;
    std::string stage = "all";
    int label = -1;
  } arg;

  // voxelize
  {
    auto* sub = app.add_subcommand("voxelize", "Voxelize a closed mesh");
    sub->add_option("--mesh", arg.in, "Input mesh (.off/.obj/.ply)")->required();
    sub->add_option("--out", arg.out, "Output grid")->required();
    flags.bind(sub->add_option("--res", "Grid resolution along the longest axis"), "resolution");
    flags.bind_negated(sub->add_flag("--no-pose", "Keep the input frame"), "canonical_pose");
    sub->callback([&] {
      action = [&](const PipelineConfig& cfg) {
        save_grid(voxelize(posed_mesh(arg.in, cfg.canonical_pose), cfg.resolution), arg.out);
      };
    });
  }
  // extract
  {
    auto* sub = app.add_subcommand("extract", "Extract the flux-based medial surface of a grid");
    sub->add_option("--in", arg.in, "Input grid")->required();
    sub->add_option("--out", arg.out, "Output skeleton")->required();
    flags.bind(sub->add_option("--tau", "Flux threshold"), "tau");
    sub->callback([&] {
      action = [&](const PipelineConfig& cfg) {
        save_skeleton(extract_medial_surface(load_grid(arg.in), cfg.tau), arg.out);
      };
    });
  }
  // reconstruct
  {
    auto* sub = app.add_subcommand("reconstruct", "Rasterize the union of medial balls");
    sub->add_option("--skel", arg.in, "Input skeleton")->required();
    sub->add_option("--out", arg.out, "Output grid")->required();
    sub->callback([&] {
      action = [&](const PipelineConfig&) {
        const auto skel = load_skeleton(arg.in);
        save_grid(reconstruct(skel, skel.geometry).grid, arg.out);
      };
    });
  }
  // miou
  {
    auto* sub = app.add_subcommand("miou", "Intersection over union of two grids");
    sub->add_option("--a", arg.a, "First grid")->required();
    sub->add_option("--b", arg.b, "Second grid")->required();
    sub->callback([&] {
      action = [&](const PipelineConfig&) { std::cout << format_g9(miou(load_grid(arg.a), load_grid(arg.b))) << '\n'; };
    });
  }
  // spectral
  {
    auto* sub = app.add_subcommand("spectral", "Medially weighted spectral embedding of a mesh");
    sub->add_option("--mesh", arg.mesh, "Mesh the skeleton was extracted from")->required();
    sub->add_option("--skel", arg.skel, "Skeleton")->required();
    sub->add_option("--out", arg.out, "Output embedding")->required();
    sub->add_option("--signature", arg.sig, "Also write the spectral signature");
    sub->add_option("--map", arg.map, "Also write the boundary-to-medial map");
    sub->add_option("--scalars", arg.scalars, "Also write a PLY with radius and leading eigenvectors");
    flags.bind(sub->add_option("--k", "Number of eigenpairs"), "k");
    flags.bind(sub->add_option("--K", "Neighbours per vertex in the medial graph"), "graph_K");
    flags.bind(sub->add_option("--epsilon", "Weight floor"), "epsilon");
    flags.bind(sub->add_option("--rho", "Mass form: radius or volume"), "rho");
    flags.bind_negated(sub->add_flag("--no-pose", "Input was voxelized without canonical pose"), "canonical_pose");
    sub->callback([&] {
      action = [&](const PipelineConfig& cfg) {
        const TriangleMesh m = posed_mesh(arg.mesh, cfg.canonical_pose);
        const auto s = load_skeleton(arg.skel);
        SpectralParams p;
        p.k = cfg.k;
        p.graph.K = cfg.graph_K;
        p.graph.epsilon = cfg.epsilon;
        p.graph.mass = cfg.rho == "volume" ? MassForm::volume : MassForm::radius;
        const auto res = medial_spectral(m, s, reconstruct(s, s.geometry), p);
        save_embedding(res.embedding, arg.out);
        if (!arg.sig.empty()) save_signature(res.signature, arg.sig);
        if (!arg.map.empty()) save_map(res.map, s, arg.map);
        if (!arg.scalars.empty()) {
          ScalarChannels ch;
          ch.emplace("radius", res.radius);
          for (int c = 0; c < std::min(3, res.embedding.k()); ++c) {
            const auto col = res.embedding.coords.col(c);
            ch.emplace("phi" + std::to_string(c + 1), std::vector<double>(col.begin(), col.end()));
          }
          export_mesh_scalars(load_mesh(arg.mesh), ch, arg.scalars);
        }
      };
    });
  }
  // correspond
  {
    auto* sub = app.add_subcommand("correspond", "Vertex correspondence between two embeddings");
    sub->add_option("--a", arg.a, "Source embedding")->required();
    sub->add_option("--b", arg.b, "Target embedding")->required();
    sub->add_option("--out", arg.out, "Output map")->required();
    sub->add_option("--mesh-a", arg.mesh_a, "Source mesh, enables the spatial alignment term");
    sub->add_option("--mesh-b", arg.mesh_b, "Target mesh, enables the spatial alignment term");
    flags.bind(sub->add_option("--mode", "nearest or drift"), "correspondence_mode");
    flags.bind_negated(sub->add_flag("--no-pose", "Meshes were processed without canonical pose"), "canonical_pose");
    sub->callback([&] {
      action = [&](const PipelineConfig& cfg) {
        if (arg.mesh_a.empty() != arg.mesh_b.empty()) fail(ErrorCode::validation, "give both --mesh-a and --mesh-b or neither");
        const auto ea = load_embedding(arg.a);
        const auto eb = load_embedding(arg.b);
        AlignOptions ao;
        ao.alpha = cfg.align_alpha;
        ao.beta = cfg.align_beta;
        ao.gamma = cfg.align_gamma;
        SpectrumAlignment al;
        if (arg.mesh_a.empty()) {
          al = align_spectra(ea, eb, ao);
        } else {
          al = align_spectra(ea, eb, posed_mesh(arg.mesh_a, cfg.canonical_pose).vertices,
                             posed_mesh(arg.mesh_b, cfg.canonical_pose).vertices, ao);
        }
        save_correspondence(match_points(apply_alignment(ea, eb, al), parse_match_mode(cfg.correspondence_mode)),
                            arg.out);
      };
    });
  }
  // evaluate
  {
    auto* sub = app.add_subcommand("evaluate", "Geodesic accuracy curve of a correspondence");
    sub->add_option("--map", arg.map, "Correspondence to score")->required();
    sub->add_option("--gt", arg.gt, "Ground-truth correspondence")->required();
    sub->add_option("--mesh", arg.mesh, "Target mesh")->required();
    sub->add_option("--out", arg.out, "Output curve")->required();
    sub->callback([&] {
      action = [&](const PipelineConfig&) {
        save_curve(eval_correspondence(load_correspondence(arg.map), load_correspondence(arg.gt).target, load_mesh(arg.mesh)),
                   arg.out);
      };
    });
  }
  // features
  {
    auto* sub = app.add_subcommand("features", "Per-vertex segmentation features");
    sub->add_option("--mesh", arg.mesh, "Mesh")->required();
    sub->add_option("--skel", arg.skel, "Skeleton of the mesh")->required();
    sub->add_option("--emb", arg.emb, "Embedding; omit for position and radius only");
    sub->add_option("--out", arg.out, "Output feature matrix")->required();
    flags.bind(sub->add_option("--spectral-columns", "Leading eigenvectors to use, -1 for all"),
               "segment_spectral_columns");
    flags.bind_negated(sub->add_flag("--no-eigen-weighting", "Do not down-weight higher modes"),
                       "segment_eigen_weighting");
    flags.bind_negated(sub->add_flag("--no-pose", "Skeleton was extracted without canonical pose"), "canonical_pose");
    sub->callback([&] {
      action = [&](const PipelineConfig& cfg) {
        const TriangleMesh m = posed_mesh(arg.mesh, cfg.canonical_pose);
        const auto radius = mesh_radii(m, load_skeleton(arg.skel));
        if (arg.emb.empty()) {
          save_features(plain_features(m, radius), arg.out);
          return;
        }
        FeatureOptions fo;
        fo.spectral_columns = cfg.segment_spectral_columns;
        fo.eigen_weighting = cfg.segment_eigen_weighting;
        save_features(augment_features(m, radius, load_embedding(arg.emb), fo), arg.out);
      };
    });
  }
  // segment
  {
    auto* sub = app.add_subcommand("segment", "Subspace-randomized spectral clustering of features");
    sub->add_option("--features", arg.feat, "Feature matrix")->required();
    sub->add_option("--out", arg.out, "Output labels")->required();
    sub->add_option("--gt", arg.gt, "Ground-truth labels; prints the Rand error");
    flags.bind(sub->add_option("--parts", "Number of parts"), "segment_parts");
    flags.bind(sub->add_option("--subspaces", "Number of random column subsets"), "segment_subspaces");
    flags.bind(sub->add_option("--seed", "Random seed"), "segment_seed");
    flags.bind(sub->add_option("--regularization", "Degree regularization"), "segment_regularization");
    sub->callback([&] {
      action = [&](const PipelineConfig& cfg) {
        ClusterOptions co;
        co.seed = cfg.segment_seed;
        co.regularization = cfg.segment_regularization;
        const auto labels = cluster(load_features(arg.feat), cfg.segment_parts, cfg.segment_subspaces, co);
        save_labels(labels, arg.out);
        if (!arg.gt.empty()) std::cout << format_g9(rand_index_error(labels, load_labels(arg.gt))) << '\n';
      };
    });
  }
  // rand
  {
    auto* sub = app.add_subcommand("rand", "Rand index error between two labelings");
    sub->add_option("--a", arg.a, "Labels")->required();
    sub->add_option("--b", arg.b, "Reference labels")->required();
    sub->callback([&] {
      action = [&](const PipelineConfig&) {
        std::cout << format_g9(rand_index_error(load_labels(arg.a), load_labels(arg.b))) << '\n';
      };
    });
  }
  // gsc
  {
    auto* sub = app.add_subcommand("gsc", "Spectral-neighbourhood point features");
    sub->add_option("--points", arg.points, "Point cloud or mesh");
    sub->add_option("--emb", arg.emb, "Embedding row-aligned with the points");
    sub->add_option("--dir", arg.dir, "Corpus root: <class>/<name>.xyz with sibling .emb");
    sub->add_option("--label", arg.label, "Class id column for a single export");
    sub->add_option("--out", arg.out, "Output file, or directory with --dir")->required();
    flags.bind(sub->add_option("--k", "Neighbours in embedding space"), "gsc_k");
    sub->callback([&] {
      action = [&](const PipelineConfig& cfg) {
        if (!arg.dir.empty()) {
          if (!arg.points.empty() || !arg.emb.empty()) fail(ErrorCode::validation, "--dir excludes --points and --emb");
          const auto res = export_directory(arg.dir, arg.out, cfg.gsc_k);
          std::cout << res.files << " files, " << res.classes.size() << " classes\n";
          return;
        }
        if (arg.points.empty() || arg.emb.empty()) fail(ErrorCode::validation, "--points and --emb are required");
        export_features(gsc(load_points(arg.points), load_embedding(arg.emb), cfg.gsc_k),
                        arg.label >= 0 ? std::optional<int>(arg.label) : std::nullopt, arg.out);
      };
    });
  }
  // run
  {
    auto* sub = app.add_subcommand("run", "Run pipeline stages with content-hash caching");
    sub->alias("pipeline");
    sub->add_option("--mesh", arg.mesh, "Input mesh")->required();
    sub->add_option("--target", arg.target, "Second mesh for correspondence");
    sub->add_option("--out", arg.out, "Output directory")->required();
    sub->add_option("--stage", arg.stage, "voxelize|skeleton|reconstruct|spectral|correspond|segment|gsc|miou|all");
    sub->add_option("--manifest", arg.manifest, "Manifest path (default <out>/manifest.json)");
    flags.bind(sub->add_option("--res", "Grid resolution"), "resolution");
    flags.bind(sub->add_option("--tau", "Flux threshold"), "tau");
    flags.bind(sub->add_option("--k", "Number of eigenpairs"), "k");
    flags.bind(sub->add_option("--K", "Neighbours per vertex in the medial graph"), "graph_K");
    flags.bind(sub->add_option("--mode", "Correspondence mode"), "correspondence_mode");
    flags.bind(sub->add_option("--parts", "Segment count"), "segment_parts");
    flags.bind(sub->add_option("--seed", "Segmentation seed"), "segment_seed");
    sub->callback([&] {
      validated_by_action = true;
      action = [&](const PipelineConfig& cfg) {
        PipelineInputs in;
        in.mesh = arg.mesh;
        if (!arg.target.empty()) in.target = fs::path(arg.target);
        in.out_dir = arg.out;
        if (!arg.manifest.empty()) in.manifest = fs::path(arg.manifest);
        const auto report = run_pipeline(cfg, in, parse_stage(arg.stage));
        for (const auto& r : report.stages)
          std::cout << r.name << ' ' << r.status << ' ' << format_g9(r.seconds) << "s\n";
        if (report.miou) std::cout << "miou " << format_g9(*report.miou) << '\n';
      };
    });
  }
  // config
  {
    auto* sub = app.add_subcommand("config", "Print the effective configuration");
    sub->callback([&] { action = [&](const PipelineConfig& cfg) { std::cout << serialize_config(cfg); }; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return exit_code(ErrorCode::validation);
  }
  const PipelineConfig cfg = flags.resolve(config_file);
  if (!validated_by_action) validate(cfg);
  action(cfg);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const medspec::Error& e) {
    std::cerr << "medial: " << e.what() << '\n';
    return medspec::exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << "medial: internal error: " << e.what() << '\n';
    return 1;
  }
}
