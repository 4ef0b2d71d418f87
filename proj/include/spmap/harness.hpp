#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "spmap/encode.hpp"
#include "spmap/mesh.hpp"
#include "spmap/nested.hpp"
#include "spmap/quality.hpp"

namespace spmap {

// Every knob of the benchmark pipeline; the resolved values are echoed into
// each report so runs are reproducible from the report alone.
struct HarnessConfig {
  std::vector<std::pair<int, int>> resolutions = {
      {32, 64}, {64, 128}, {128, 256}, {256, 512}};
  std::vector<int> layer_counts = {1, 2, 3, 4};
  std::vector<std::string> representations = {"sp", "nested"};
  std::size_t samples = 100000;          // chamfer / f-score points per mesh
  std::size_t coverage_samples = 10000;  // surface points per coverage probe
  double coverage_tol = 0.01;
  int voxels = 0;       // decode grid; 0 selects min(2H, 384)
  int iou_voxels = 64;  // volume-IoU grid over [-1,1]^3
  std::uint64_t seed = 0x5eed;
  int workers = 1;
  FuseRule fuse_rule = FuseRule::kMajority;
  QualityWeights weights;
  double discontinuity_tol = -1.0;  // open-surface triangulation; <0 = auto
};

int auto_voxels(const HarnessConfig& cfg, int H);

// key=value lines, '#' comments, later assignments win.
std::map<std::string, std::string> parse_config_file(const std::string& path);

// Unknown keys or malformed values throw ParseError.
void apply_config(HarnessConfig& cfg,
                  const std::map<std::string, std::string>& kv);

// Canonical string form of every knob, suitable for report embedding.
std::map<std::string, std::string> config_echo(const HarnessConfig& cfg);

struct CorpusEntry {
  std::string id;
  std::string path;  // file path or "fixture:<id>"
  bool watertight = true;
};

// The six built-in fixtures via "fixture:" pseudo-paths.
std::vector<CorpusEntry> default_corpus();

// Lines of "id,path,watertight" with '#' comments; ids must be unique.
std::vector<CorpusEntry> load_manifest(const std::string& path);

// Accepts "fixture:<id>" or a mesh file path.
TriangleMesh load_corpus_mesh(const std::string& path);

constexpr double kAbsent = std::numeric_limits<double>::quiet_NaN();

// One benchmark result; NaN-valued fields serialize as empty CSV cells.
struct ReportRow {
  std::string mesh_id;
  std::string representation;  // "sp" or "nested"
  int H = 0, W = 0;            // nested stacks use H = W = N
  int k = 0;
  double chamfer = kAbsent;
  double vol_iou = kAbsent;
  double f_score = kAbsent;
  std::uint64_t storage_raw = 0;
  std::uint64_t storage_deflated = 0;
  double seam_abs_rel = kAbsent;
  double polar_abs_rel = kAbsent;
  double equator_abs_rel = kAbsent;
  std::uint32_t truncation_count = 0;
  double l1 = kAbsent;
  double l_edge = kAbsent;
  double l_spec = kAbsent;
  double l_total = kAbsent;
  double coverage = kAbsent;  // report JSON only, not a CSV column
};

std::string csv_header();
std::string csv_line(const ReportRow& row);

// Statement embedded in every JSON report: numbers are only comparable
// within this convention.
extern const char* kChamferConvention;

struct RoundtripResult {
  ReportRow row;
  TriangleMesh reconstructed;
};

// normalize -> encode -> decode -> metrics vs source -> re-encode -> map
// quality.  Watertight meshes decode via parity occupancy + marching cubes
// (zero truncation required), open ones via grid triangulation.  cache_dir
// may be empty; cached encodings are keyed by (mesh hash, encode config).
RoundtripResult run_roundtrip(const TriangleMesh& mesh,
                              const std::string& mesh_id, bool watertight,
                              const std::string& representation, int H, int W,
                              int k, const HarnessConfig& cfg,
                              const std::string& cache_dir = "");

// Full JSON report (config echo + row) for one roundtrip.
std::string roundtrip_report_json(const HarnessConfig& cfg,
                                  const ReportRow& row);

struct SweepFailure {
  std::string mesh_id;
  std::string representation;
  int H = 0, W = 0, k = 0;
  std::string error;
};

struct SweepOutput {
  std::vector<ReportRow> rows;
  std::vector<SweepFailure> failures;
  std::string csv;           // written to <out_dir>/report.csv
  std::string summary_json;  // written to <out_dir>/summary.json
};

// Full factorial corpus x representations x resolutions x layer counts.
// Cells run serially in a fixed order (inner loops may use cfg.workers);
// failures are logged and leave incomplete cells in the summary.
SweepOutput run_sweep(const std::vector<CorpusEntry>& corpus,
                      const HarnessConfig& cfg, const std::string& out_dir);

}  // namespace spmap
