#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "spmap/fixtures.hpp"
#include "spmap/harness.hpp"

using namespace spmap;

namespace {

std::string write_tmp(const std::string& name, const std::string& body) {
  std::string path = (std::filesystem::temp_directory_path() / name).string();
  std::ofstream f(path);
  f << body;
  return path;
}

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  REQUIRE(f.good());
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

HarnessConfig tiny_config() {
  HarnessConfig cfg;
  cfg.resolutions = {{16, 32}};
  cfg.layer_counts = {2};
  cfg.representations = {"sp"};
  cfg.samples = 400;
  cfg.coverage_samples = 400;
  cfg.voxels = 32;
  cfg.iou_voxels = 24;
  return cfg;
}

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("config files are key=value with comments, last writer wins") {
  std::string path = write_tmp("spmap_cfg.txt",
                               "# benchmark knobs\n"
                               "samples = 1234\n"
                               "seed=99\n"
                               "\n"
                               "samples = 777   # later assignment\n");
  auto kv = parse_config_file(path);
  CHECK(kv.at("samples") == "777");
  CHECK(kv.at("seed") == "99");
  CHECK(kv.size() == 2);
  std::remove(path.c_str());

  CHECK_THROWS_AS(parse_config_file("/nonexistent/spmap.cfg"), FileNotFound);
}

TEST_CASE("unknown keys and malformed values are rejected") {
  HarnessConfig cfg;
  CHECK_THROWS_AS(apply_config(cfg, {{"no_such_knob", "1"}}), ParseError);
  CHECK_THROWS_AS(apply_config(cfg, {{"samples", "many"}}), ParseError);
  CHECK_THROWS_AS(apply_config(cfg, {{"resolutions", "banana"}}), ParseError);
  CHECK_THROWS_AS(apply_config(cfg, {{"representations", "sp,holo"}}),
                  ParseError);
}

TEST_CASE("the echo of a config reproduces the config") {
  HarnessConfig cfg;
  cfg.resolutions = {{16, 32}, {64, 128}};
  cfg.layer_counts = {1, 3};
  cfg.representations = {"nested"};
  cfg.samples = 5000;
  cfg.coverage_tol = 0.02;
  cfg.voxels = 48;
  cfg.seed = 42;
  cfg.fuse_rule = FuseRule::kUnion;
  cfg.weights.alpha = 0.3;
  cfg.discontinuity_tol = 0.05;

  auto echo = config_echo(cfg);
  CHECK(echo.count("workers") == 0);  // execution detail, not a result knob
  HarnessConfig back;  // defaults differ from cfg in every overridden field
  apply_config(back, echo);
  CHECK(back.resolutions == cfg.resolutions);
  CHECK(back.layer_counts == cfg.layer_counts);
  CHECK(back.representations == cfg.representations);
  CHECK(back.samples == cfg.samples);
  CHECK(back.coverage_tol == cfg.coverage_tol);
  CHECK(back.voxels == cfg.voxels);
  CHECK(back.seed == cfg.seed);
  CHECK(back.fuse_rule == cfg.fuse_rule);
  CHECK(back.weights.alpha == cfg.weights.alpha);
  CHECK(back.discontinuity_tol == cfg.discontinuity_tol);
}

TEST_CASE("auto voxel selection follows min(2H, 384)") {
  HarnessConfig cfg;
  cfg.voxels = 0;
  CHECK(auto_voxels(cfg, 32) == 64);
  CHECK(auto_voxels(cfg, 128) == 256);
  CHECK(auto_voxels(cfg, 256) == 384);
  cfg.voxels = 100;
  CHECK(auto_voxels(cfg, 256) == 100);
}

TEST_CASE("csv header is the frozen column contract") {
  CHECK(csv_header() ==
        "mesh_id,representation,resolution,k,chamfer,vol_iou,f_score,"
        "storage_raw,storage_deflated,seam_abs_rel,polar_abs_rel,"
        "equator_abs_rel,truncation_count,l1,l_edge,l_spec,l_total");
}

TEST_CASE("absent metrics serialize as empty cells, not NaN text") {
  ReportRow row;
  row.mesh_id = "dome";
  row.representation = "sp";
  row.H = 16;
  row.W = 32;
  row.k = 2;
  row.chamfer = 0.25;
  row.storage_raw = 100;
  row.storage_deflated = 50;
  std::string line = csv_line(row);
  CHECK(line.substr(0, 17) == "dome,sp,16x32,2,0");
  CHECK(line.find("nan") == std::string::npos);
  CHECK(line.find("NaN") == std::string::npos);
  // vol_iou and f_score sit between chamfer and storage_raw: ",,"
  CHECK(line.find(",,") != std::string::npos);
  std::size_t commas = 0;
  for (char c : line) commas += c == ',';
  CHECK(commas == 16);  // 17 columns
}

TEST_CASE("manifests resolve ids, paths and flags") {
  std::string path = write_tmp("spmap_manifest.csv",
                               "# id,path,watertight\n"
                               "ball,fixture:sphere,1\n"
                               "lid,fixture:dome,0\n");
  auto corpus = load_manifest(path);
  REQUIRE(corpus.size() == 2);
  CHECK(corpus[0].id == "ball");
  CHECK(corpus[0].watertight);
  CHECK_FALSE(corpus[1].watertight);
  TriangleMesh mesh = load_corpus_mesh(corpus[0].path);
  CHECK(mesh.faces.size() == fx_sphere().faces.size());
  std::remove(path.c_str());

  std::string dup = write_tmp("spmap_manifest_dup.csv",
                              "a,fixture:sphere,1\na,fixture:torus,1\n");
  CHECK_THROWS_AS(load_manifest(dup), ParseError);
  std::remove(dup.c_str());
  CHECK_THROWS_AS(load_corpus_mesh("fixture:nope"), ParseError);

  auto builtin = default_corpus();
  REQUIRE(builtin.size() == 6);
  CHECK(builtin[0].path == "fixture:sphere");
  CHECK(builtin[5].id == "dome");
  CHECK_FALSE(builtin[5].watertight);
}

TEST_CASE("a sphere roundtrip produces a sane, fully populated row") {
  HarnessConfig cfg = tiny_config();
  RoundtripResult res = run_roundtrip(fx_sphere(), "sphere", true, "sp", 32,
                                      64, 2, cfg);
  const ReportRow& row = res.row;
  CHECK(row.mesh_id == "sphere");
  CHECK(row.representation == "sp");
  CHECK(row.H == 32);
  CHECK(row.W == 64);
  CHECK(row.k == 2);
  CHECK(row.chamfer > 0.0);
  // Sanity ceiling for a 32-voxel decode in the [-1,1] frame; precision
  // bounds live in the acceptance gate at higher resolution.
  CHECK(row.chamfer < 0.12);  // unit-cube scale, ~voxel-size error
  CHECK(row.vol_iou > 0.8);
  CHECK(row.vol_iou <= 1.0);
  CHECK(row.f_score > 50.0);
  CHECK(row.storage_raw == oracle::spm_size(32, 64, 2, false));
  CHECK(row.storage_deflated > 0);
  CHECK(row.storage_deflated < row.storage_raw);
  CHECK(row.truncation_count == 0);
  CHECK(std::isfinite(row.seam_abs_rel));
  CHECK(std::isfinite(row.l_total));
  CHECK(row.l1 >= 0.0);
  CHECK(oracle::is_closed_manifold(res.reconstructed));

  std::string json = roundtrip_report_json(cfg, row);
  CHECK(json.find("\"mesh_id\": \"sphere\"") != std::string::npos);
  CHECK(json.find(kChamferConvention) != std::string::npos);
  CHECK(json.find("workers") == std::string::npos);
}

TEST_CASE("open meshes roundtrip through the open path") {
  HarnessConfig cfg = tiny_config();
  RoundtripResult res = run_roundtrip(fx_dome(), "dome", false, "sp", 32, 64,
                                      2, cfg);
  CHECK(std::isnan(res.row.vol_iou));  // volume undefined for open surfaces
  CHECK(res.row.chamfer < 0.15);
  CHECK(res.reconstructed.faces.size() > 0);
  CHECK_FALSE(oracle::is_closed_manifold(res.reconstructed));
}

TEST_CASE("nested roundtrips leave grid-quality columns absent") {
  HarnessConfig cfg = tiny_config();
  RoundtripResult res = run_roundtrip(fx_sphere(), "sphere", true, "nested",
                                      32, 32, 2, cfg);
  const ReportRow& row = res.row;
  CHECK(row.representation == "nested");
  CHECK(row.storage_raw == oracle::spn_size(32, 2));
  CHECK(row.chamfer > 0.0);
  CHECK(std::isnan(row.seam_abs_rel));
  CHECK(std::isnan(row.l1));
  CHECK(std::isnan(row.l_total));
  std::string line = csv_line(row);
  CHECK(line.find("nan") == std::string::npos);
}

TEST_CASE("truncation on a watertight mesh fails the cell loudly") {
  HarnessConfig cfg = tiny_config();
  CHECK_THROWS_AS(run_roundtrip(make_fixture("cup"), "cup", true, "sp", 32,
                                64, 1, cfg),
                  TruncatedMap);
}

TEST_CASE("sweeps are ordered, cached and byte-stable") {
  namespace fs = std::filesystem;
  HarnessConfig cfg = tiny_config();
  cfg.layer_counts = {1, 2};
  std::vector<CorpusEntry> corpus = {{"sphere", "fixture:sphere", true},
                                     {"dome", "fixture:dome", false}};
  fs::path base = fs::temp_directory_path() / "spmap_sweep_test";
  fs::remove_all(base);
  fs::create_directories(base);

  SweepOutput a = run_sweep(corpus, cfg, (base / "a").string());
  CHECK(a.rows.size() + a.failures.size() == 4);  // 2 meshes x 1 res x 2 k
  CHECK(a.rows.size() == 4);
  CHECK(a.failures.empty());
  // Rows are sorted by (mesh_id, representation, H, k).
  CHECK(a.rows[0].mesh_id == "dome");
  CHECK(a.rows[0].k == 1);
  CHECK(a.rows[1].k == 2);
  CHECK(a.rows[2].mesh_id == "sphere");
  CHECK(slurp((base / "a" / "report.csv").string()) == a.csv);
  CHECK(slurp((base / "a" / "summary.json").string()) == a.summary_json);
  CHECK(a.csv.substr(0, csv_header().size()) == csv_header());

  SweepOutput b = run_sweep(corpus, cfg, (base / "b").string());
  CHECK(b.csv == a.csv);  // rerun from scratch: byte-identical
  CHECK(b.summary_json == a.summary_json);

  // Third run reuses the cache the second run left behind.
  SweepOutput c = run_sweep(corpus, cfg, (base / "b").string());
  CHECK(c.csv == a.csv);
  CHECK(c.summary_json == a.summary_json);

  // Failures are recorded, not silently dropped: cup at k=1 truncates.
  std::vector<CorpusEntry> bad = {{"cup", "fixture:cup", true}};
  cfg.layer_counts = {1};
  SweepOutput f = run_sweep(bad, cfg, (base / "f").string());
  CHECK(f.rows.empty());
  REQUIRE(f.failures.size() == 1);
  CHECK(f.failures[0].mesh_id == "cup");
  CHECK_FALSE(f.failures[0].error.empty());
  CHECK(f.summary_json.find("cup") != std::string::npos);
  fs::remove_all(base);
}

}  // TEST_SUITE
