#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"
#include "spmap/decode.hpp"
#include "spmap/encode.hpp"
#include "spmap/errors.hpp"
#include "spmap/fixtures.hpp"
#include "spmap/harness.hpp"
#include "spmap/mesh_io.hpp"
#include "spmap/metrics.hpp"
#include "spmap/nested.hpp"
#include "spmap/quality.hpp"
#include "spmap/util.hpp"

namespace {

using namespace spmap;

struct Timer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  ~Timer() {
    auto t1 = std::chrono::steady_clock::now();
    std::cerr << "[time] " << std::chrono::duration<double>(t1 - t0).count()
              << "s\n";
  }
};

// "HxW" or a bare "N" (sp: N x 2N, nested: N x N).
std::pair<int, int> parse_res(const std::string& s, bool nested) {
  std::size_t x = s.find('x');
  if (x == std::string::npos) {
    int n = std::stoi(s);
    return nested ? std::make_pair(n, n) : std::make_pair(n, 2 * n);
  }
  return {std::stoi(s.substr(0, x)), std::stoi(s.substr(x + 1))};
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path + ": cannot open for write");
  out << text;
}

std::string num_or_null(double v) {
  if (std::isnan(v) || std::isinf(v)) return "null";
  return format_double(v);
}

std::string histogram_json(const std::vector<std::size_t>& h) {
  std::string s = "{";
  for (std::size_t i = 0; i < h.size(); ++i) {
    if (i) s += ", ";
    s += "\"" + std::to_string(i) + "\": " + std::to_string(h[i]);
  }
  return s + "}";
}

HarnessConfig build_config(const std::string& config_path,
                           const std::map<std::string, std::string>& cli) {
  HarnessConfig cfg;
  cfg.workers = default_workers();
  if (!config_path.empty()) apply_config(cfg, parse_config_file(config_path));
  apply_config(cfg, cli);
  return cfg;
}

bool fixture_is_watertight(const std::string& path, bool fallback) {
  if (path.rfind("fixture:", 0) != 0) return fallback;
  std::string id = path.substr(8);
  for (const FixtureSpec& f : fixture_corpus()) {
    if (id == f.id) return f.watertight;
  }
  return fallback;
}

int run(int argc, char** argv) {
  CLI::App app{
      "spmap: multi-layer spherical-projection depth map codec and "
      "evaluation harness.\nMesh arguments accept file paths (.obj/.ply) or "
      "fixture:<id> for built-in shapes."};
  app.require_subcommand(1);
  argv = app.ensure_utf8(argv);

  std::string mesh_path, in_path, ref_path, out_path, config_path;
  std::string res = "256x512", repr = "sp", manifest_path, cloud_path;
  std::string fixture_id;
  int layers = 4, voxels = 0, margin = -1;
  long long samples = -1, coverage_samples_flag = -1;
  std::uint64_t seed = 0;
  bool seed_set = false, normals = false, open_surface = false;
  bool no_normalize = false;
  double tol = -1.0, coverage_tol = 0.01;
  int workers = default_workers();
  std::string rule = "majority";
  double mu = -1, zeta = -1, alpha = -1, beta = -1, highpass = -1,
         sobel_frac = -1;

  auto add_seed = [&](CLI::App* cmd) {
    cmd->add_option_function<std::uint64_t>(
        "--seed", [&](const std::uint64_t& v) { seed = v; seed_set = true; },
        "base RNG seed");
  };

  // encode
  auto* enc = app.add_subcommand("encode", "encode a mesh into .spm / .spn");
  enc->add_option("mesh", mesh_path, "input mesh or fixture:<id>")->required();
  enc->add_option("--res", res, "grid HxW (sp) or N (nested)");
  enc->add_option("--layers", layers, "depth layers k");
  enc->add_option("--repr", repr, "sp | nested")
      ->check(CLI::IsMember({"sp", "nested"}));
  enc->add_flag("--normals", normals, "store per-sample surface normals (sp)");
  enc->add_flag("--no-normalize", no_normalize,
                "encode the mesh as-is (must already fit the unit box)");
  add_seed(enc);
  enc->add_option("--workers", workers, "worker threads");
  enc->add_option("--out,-o", out_path, "output file")->required();
  enc->callback([&] {
    Timer t;
    TriangleMesh mesh = load_corpus_mesh(mesh_path);
    if (!no_normalize) normalize_mesh(mesh);
    if (repr == "sp") {
      auto [H, W] = parse_res(res, false);
      EncodeConfig ec;
      ec.grid = SphericalGrid(H, W);
      ec.k = layers;
      ec.store_normals = normals;
      ec.seed = seed;
      ec.workers = workers;
      SpMap map = encode(mesh, ec);
      write_spm(map, out_path);
      std::cout << "{\"out\": \"" << out_path
                << "\", \"truncated_pixels\": " << map.truncated_pixels
                << ", \"bytes\": "
                << spm_file_size(H, W, layers, normals)
                << ", \"layer_histogram\": "
                << histogram_json(layer_histogram(map)) << "}\n";
    } else {
      auto [N, N2] = parse_res(res, true);
      if (N != N2) throw ParseError("nested stacks need a square resolution");
      NestedConfig nc;
      nc.N = N;
      nc.k = layers;
      nc.seed = seed;
      nc.workers = workers;
      NestedStacks st = encode_nested(mesh, nc);
      write_spn(out_path, st);
      std::cout << "{\"out\": \"" << out_path
                << "\", \"truncated_pixels\": " << st.truncated_pixels
                << ", \"bytes\": " << spn_file_size(N, layers) << "}\n";
    }
  });

  // decode
  auto* dec = app.add_subcommand("decode", "reconstruct a mesh from .spm/.spn");
  dec->add_option("map", in_path, "input .spm or .spn")->required();
  dec->add_option("--voxels", voxels, "occupancy resolution (0 = min(2H,384))");
  dec->add_flag("--open", open_surface,
                "treat as open surface: grid triangulation instead of parity "
                "occupancy (spm only)");
  dec->add_option("--tol", tol,
                  "depth discontinuity tolerance for --open (<0 = auto)");
  dec->add_option("--rule", rule, "nested fusion vote rule")
      ->check(CLI::IsMember({"intersection", "majority", "union"}));
  dec->add_option("--workers", workers, "worker threads");
  dec->add_option("--out,-o", out_path, "output mesh (.obj/.ply)")->required();
  dec->add_option("--cloud", cloud_path,
                  "also write the oriented point cloud (.ply, spm only)");
  dec->callback([&] {
    Timer t;
    std::ifstream probe(in_path, std::ios::binary);
    if (!probe) throw FileNotFound(in_path + ": cannot open");
    char magic[4] = {};
    probe.read(magic, 4);
    probe.close();
    TriangleMesh mesh;
    if (std::string(magic, 4) == "SPN1") {
      NestedStacks st = read_spn(in_path);
      FuseRule fr = rule == "intersection" ? FuseRule::kIntersection
                    : rule == "union"      ? FuseRule::kUnion
                                           : FuseRule::kMajority;
      int nv = voxels > 0 ? voxels : std::min(2 * st.stacks[0].N, 384);
      mesh = reconstruct_nested(st, nv, fr, workers);
    } else {
      SpMap map = read_spm(in_path);
      if (!cloud_path.empty()) {
        OrientedPointCloud cloud = unproject_map(map);
        save_point_cloud_ply(cloud_path, cloud.points, &cloud.normals);
      }
      if (open_surface) {
        mesh = grid_triangulate(map, tol);
      } else {
        int nv = voxels > 0 ? voxels : std::min(2 * map.grid.H, 384);
        mesh = marching_cubes(occupancy_from_map(map, nv, workers));
      }
    }
    save_mesh(out_path, mesh);
    std::cout << "{\"out\": \"" << out_path
              << "\", \"vertices\": " << mesh.vertex_count()
              << ", \"faces\": " << mesh.face_count() << "}\n";
  });

  // roundtrip
  auto* rt = app.add_subcommand(
      "roundtrip", "encode, decode and score one mesh; emits a JSON report");
  rt->add_option("mesh", mesh_path, "input mesh or fixture:<id>")->required();
  rt->add_option("--res", res, "grid HxW (sp) or N (nested)");
  rt->add_option("--layers", layers, "depth layers k");
  rt->add_option("--repr", repr, "sp | nested")
      ->check(CLI::IsMember({"sp", "nested"}));
  rt->add_flag("--open", open_surface, "force the open-surface decode path");
  rt->add_option("--samples", samples, "metric sample count");
  rt->add_option("--voxels", voxels, "decode occupancy resolution");
  add_seed(rt);
  rt->add_option("--workers", workers, "worker threads");
  rt->add_option("--config", config_path, "key=value config file");
  rt->add_option("--out,-o", out_path, "report path (default stdout)");
  rt->callback([&] {
    Timer t;
    std::map<std::string, std::string> cli;
    if (samples >= 0) cli["samples"] = std::to_string(samples);
    if (voxels > 0) cli["voxels"] = std::to_string(voxels);
    if (seed_set) cli["seed"] = std::to_string(seed);
    cli["workers"] = std::to_string(workers);
    HarnessConfig cfg = build_config(config_path, cli);
    TriangleMesh mesh = load_corpus_mesh(mesh_path);
    bool watertight = fixture_is_watertight(mesh_path, true) && !open_surface;
    bool nested = repr == "nested";
    auto [H, W] = parse_res(res, nested);
    std::string mesh_id = mesh_path.rfind("fixture:", 0) == 0
                              ? mesh_path.substr(8)
                              : std::filesystem::path(mesh_path)
                                    .stem()
                                    .string();
    RoundtripResult rr =
        run_roundtrip(mesh, mesh_id, watertight, repr, H, W, layers, cfg);
    write_text(out_path, roundtrip_report_json(cfg, rr.row));
  });

  // sweep
  auto* sw = app.add_subcommand(
      "sweep", "factorial benchmark over a corpus; writes CSV + JSON");
  sw->add_option("--manifest", manifest_path,
                 "corpus manifest (id,path,watertight); default: built-in "
                 "fixtures");
  sw->add_option("--config", config_path, "key=value config file");
  sw->add_option("--res", res, "comma-separated resolutions override")
      ->default_str("");
  sw->add_option("--layers", layers, "ignored; use --config or --k-list");
  sw->add_option("--k-list", fixture_id, "comma-separated layer counts");
  sw->add_option("--repr", repr, "comma-separated representations")
      ->default_str("");
  sw->add_option("--samples", samples, "metric sample count");
  sw->add_option("--voxels", voxels, "decode occupancy resolution");
  add_seed(sw);
  sw->add_option("--workers", workers, "worker threads");
  sw->add_option("--out,-o", out_path, "output directory")->required();
  sw->callback([&] {
    Timer t;
    std::map<std::string, std::string> cli;
    if (sw->count("--res")) cli["resolutions"] = res;
    if (sw->count("--k-list")) cli["layers"] = fixture_id;
    if (sw->count("--repr")) cli["representations"] = repr;
    if (samples >= 0) cli["samples"] = std::to_string(samples);
    if (voxels > 0) cli["voxels"] = std::to_string(voxels);
    if (seed_set) cli["seed"] = std::to_string(seed);
    cli["workers"] = std::to_string(workers);
    HarnessConfig cfg = build_config(config_path, cli);
    std::vector<CorpusEntry> corpus = manifest_path.empty()
                                          ? default_corpus()
                                          : load_manifest(manifest_path);
    SweepOutput out = run_sweep(corpus, cfg, out_path);
    std::cout << "{\"csv\": \"" << out_path << "/report.csv\", \"summary\": \""
              << out_path << "/summary.json\", \"rows\": " << out.rows.size()
              << ", \"failures\": " << out.failures.size() << "}\n";
  });

  // quality
  auto* ql = app.add_subcommand(
      "quality", "compare two .spm maps with the map-quality scores");
  ql->add_option("candidate", in_path, "candidate .spm")->required();
  ql->add_option("reference", ref_path, "reference .spm")->required();
  ql->add_option("--config", config_path, "key=value config file");
  ql->add_option("--mu", mu, "edge-region weight");
  ql->add_option("--zeta", zeta, "spectral magnitude weight");
  ql->add_option("--alpha", alpha, "edge term weight");
  ql->add_option("--beta", beta, "spectral term weight");
  ql->add_option("--highpass", highpass, "high-pass radius fraction");
  ql->add_option("--sobel-frac", sobel_frac, "Sobel threshold fraction");
  ql->add_option("--margin", margin, "edge dilation margin (pixels)");
  ql->add_option("--out,-o", out_path, "report path (default stdout)");
  ql->callback([&] {
    Timer t;
    std::map<std::string, std::string> cli;
    if (mu >= 0) cli["mu"] = format_double(mu);
    if (zeta >= 0) cli["zeta"] = format_double(zeta);
    if (alpha >= 0) cli["alpha"] = format_double(alpha);
    if (beta >= 0) cli["beta"] = format_double(beta);
    if (highpass >= 0) cli["highpass_radius_frac"] = format_double(highpass);
    if (sobel_frac >= 0) cli["sobel_threshold_frac"] = format_double(sobel_frac);
    if (margin >= 0) cli["margin"] = std::to_string(margin);
    HarnessConfig cfg = build_config(config_path, cli);
    SpMap cand = read_spm(in_path);
    SpMap ref = read_spm(ref_path);
    QualityBreakdown q = combined_quality(cand, ref, cfg.weights);
    const QualityWeights& w = cfg.weights;
    std::string json =
        "{\n  \"weights\": {\"mu\": " + format_double(w.mu) +
        ", \"zeta\": " + format_double(w.zeta) +
        ", \"alpha\": " + format_double(w.alpha) +
        ", \"beta\": " + format_double(w.beta) +
        ", \"highpass_radius_frac\": " + format_double(w.highpass_radius_frac) +
        ", \"sobel_threshold_frac\": " + format_double(w.sobel_threshold_frac) +
        ", \"margin\": " + std::to_string(w.margin) + "},\n" +
        "  \"l1\": " + num_or_null(q.l1) +
        ",\n  \"l_edge\": " + num_or_null(q.l_edge) +
        ",\n  \"l_spec\": " + num_or_null(q.l_spec) +
        ",\n  \"l_total\": " + num_or_null(q.total) + "\n}\n";
    write_text(out_path, json);
  });

  // coverage
  auto* cv = app.add_subcommand(
      "coverage", "fraction of mesh surface captured by a .spm map");
  cv->add_option("mesh", mesh_path, "source mesh or fixture:<id>")->required();
  cv->add_option("map", in_path, "encoded .spm")->required();
  cv->add_option("--samples", coverage_samples_flag, "surface sample count");
  cv->add_option("--tol", coverage_tol, "coverage distance tolerance");
  cv->add_flag("--no-normalize", no_normalize,
               "score the mesh as-is (frame must match the map)");
  add_seed(cv);
  cv->add_option("--out,-o", out_path, "report path (default stdout)");
  cv->callback([&] {
    Timer t;
    TriangleMesh mesh = load_corpus_mesh(mesh_path);
    if (!no_normalize) normalize_mesh(mesh);
    SpMap map = read_spm(in_path);
    std::size_t n = coverage_samples_flag > 0
                        ? static_cast<std::size_t>(coverage_samples_flag)
                        : 10000;
    double cov = coverage(mesh, map, n, coverage_tol,
                          seed_set ? seed : 0x5eed);
    std::string json = "{\"coverage\": " + format_double(cov) +
                       ", \"samples\": " + std::to_string(n) +
                       ", \"tol\": " + format_double(coverage_tol) +
                       ", \"layer_histogram\": " +
                       histogram_json(layer_histogram(map)) + "}\n";
    write_text(out_path, json);
  });

  // info
  auto* in_cmd = app.add_subcommand("info", "inspect a .spm/.spn/mesh file");
  in_cmd->add_option("file", in_path, "input file")->required();
  in_cmd->callback([&] {
    std::string json;
    std::string ext = std::filesystem::path(in_path).extension().string();
    std::ifstream probe(in_path, std::ios::binary);
    if (!probe) throw FileNotFound(in_path + ": cannot open");
    char magic[4] = {};
    probe.read(magic, 4);
    probe.close();
    std::string m(magic, 4);
    if (m == "SPM1") {
      SpMap map = read_spm(in_path);
      json = "{\"format\": \"spm\", \"resolution\": \"" +
             std::to_string(map.grid.H) + "x" + std::to_string(map.grid.W) +
             "\", \"k\": " + std::to_string(map.k) +
             ", \"normals\": " + (map.has_normals() ? "true" : "false") +
             ", \"truncated_pixels\": " + std::to_string(map.truncated_pixels) +
             ", \"source_hash\": \"" + std::to_string(map.source_hash) +
             "\", \"layer_histogram\": " +
             histogram_json(layer_histogram(map)) + "}\n";
    } else if (m == "SPN1") {
      NestedStacks st = read_spn(in_path);
      json = "{\"format\": \"spn\", \"n\": " +
             std::to_string(st.stacks[0].N) +
             ", \"k\": " + std::to_string(st.stacks[0].k) +
             ", \"truncated_pixels\": " + std::to_string(st.truncated_pixels) +
             ", \"source_hash\": \"" + std::to_string(st.source_hash) +
             "\"}\n";
    } else {
      TriangleMesh mesh = load_corpus_mesh(in_path);
      Aabb box = bounding_box(mesh);
      json = "{\"format\": \"mesh\", \"vertices\": " +
             std::to_string(mesh.vertex_count()) +
             ", \"faces\": " + std::to_string(mesh.face_count()) +
             ", \"surface_area\": " + format_double(surface_area(mesh)) +
             ", \"bbox_min\": [" + format_double(box.lo.x) + ", " +
             format_double(box.lo.y) + ", " + format_double(box.lo.z) +
             "], \"bbox_max\": [" + format_double(box.hi.x) + ", " +
             format_double(box.hi.y) + ", " + format_double(box.hi.z) +
             "]}\n";
    }
    std::cout << json;
  });

  // fixtures
  auto* fx = app.add_subcommand(
      "fixtures", "write the built-in fixture meshes as OBJ + manifest");
  fx->add_option("--id", fixture_id, "write a single fixture");
  fx->add_option("--out,-o", out_path, "output directory")->required();
  fx->callback([&] {
    std::filesystem::create_directories(out_path);
    std::vector<std::string> ids =
        fixture_id.empty() ? fixture_ids()
                           : std::vector<std::string>{fixture_id};
    for (const std::string& id : ids) {
      save_obj(out_path + "/" + id + ".obj", make_fixture(id));
      std::cout << out_path + "/" + id + ".obj\n";
    }
    if (fixture_id.empty()) {
      std::ofstream mf(out_path + "/manifest.csv", std::ios::binary);
      if (!mf) throw IoError(out_path + "/manifest.csv: cannot write");
      mf << "# id,path,watertight\n";
      for (const FixtureSpec& f : fixture_corpus()) {
        mf << f.id << "," << out_path << "/" << f.id << ".obj" << ","
           << (f.watertight ? 1 : 0) << "\n";
      }
      std::cout << out_path + "/manifest.csv\n";
    }
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const spmap::FileNotFound& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const spmap::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const spmap::BadMagic& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const spmap::HeaderMismatch& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const spmap::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const spmap::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
