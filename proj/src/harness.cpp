#include "spmap/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "spmap/decode.hpp"
#include "spmap/errors.hpp"
#include "spmap/fixtures.hpp"
#include "spmap/mesh_io.hpp"
#include "spmap/metrics.hpp"
#include "spmap/util.hpp"

namespace spmap {

const char* kChamferConvention =
    "chamfer = symmetric mean L2 nearest-neighbor distance, halved, on "
    "area-weighted samples of meshes normalized to [-1,1]; values are "
    "comparable only within this convention";

int auto_voxels(const HarnessConfig& cfg, int H) {
  if (cfg.voxels > 0) return cfg.voxels;
  return std::min(2 * H, 384);
}

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(trim(cur));
  return out;
}

long long parse_int(const std::string& key, const std::string& s) {
  try {
    std::size_t pos = 0;
    long long v = std::stoll(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError("config " + key + ": bad integer '" + s + "'");
  }
}

double parse_num(const std::string& key, const std::string& s) {
  try {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError("config " + key + ": bad number '" + s + "'");
  }
}

std::pair<int, int> parse_resolution(const std::string& s) {
  std::size_t x = s.find('x');
  if (x == std::string::npos) {
    throw ParseError("resolution '" + s + "' is not HxW");
  }
  int H = static_cast<int>(parse_int("resolution", s.substr(0, x)));
  int W = static_cast<int>(parse_int("resolution", s.substr(x + 1)));
  if (H < 2 || W < 4) throw ParseError("resolution '" + s + "' too small");
  return {H, W};
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(v));
  return buf;
}

std::string json_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size() + 2);
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof(buf), "\\u%04x", c);
          out += buf;
        } else {
          out.push_back(c);
        }
    }
  }
  return out;
}

std::string json_num(double v) {
  if (std::isnan(v) || std::isinf(v)) return "null";
  return format_double(v);
}

}  // namespace

std::map<std::string, std::string> parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FileNotFound(path + ": cannot open config");
  std::map<std::string, std::string> kv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::string t = trim(line);
    if (t.empty()) continue;
    std::size_t eq = t.find('=');
    if (eq == std::string::npos) {
      throw ParseError(path + ":" + std::to_string(lineno) +
                       ": expected key = value");
    }
    std::string key = trim(t.substr(0, eq));
    std::string value = trim(t.substr(eq + 1));
    if (key.empty()) {
      throw ParseError(path + ":" + std::to_string(lineno) + ": empty key");
    }
    kv[key] = value;
  }
  return kv;
}

void apply_config(HarnessConfig& cfg,
                  const std::map<std::string, std::string>& kv) {
  for (const auto& [key, value] : kv) {
    if (key == "resolutions") {
      cfg.resolutions.clear();
      for (const std::string& r : split(value, ',')) {
        if (!r.empty()) cfg.resolutions.push_back(parse_resolution(r));
      }
      if (cfg.resolutions.empty()) throw ParseError("config: no resolutions");
    } else if (key == "layers") {
      cfg.layer_counts.clear();
      for (const std::string& s : split(value, ',')) {
        if (s.empty()) continue;
        int k = static_cast<int>(parse_int(key, s));
        if (k < 1) throw ParseError("config layers: k must be >= 1");
        cfg.layer_counts.push_back(k);
      }
      if (cfg.layer_counts.empty()) throw ParseError("config: no layers");
    } else if (key == "representations") {
      cfg.representations.clear();
      for (const std::string& s : split(value, ',')) {
        if (s.empty()) continue;
        if (s != "sp" && s != "nested") {
          throw ParseError("config representations: unknown '" + s + "'");
        }
        cfg.representations.push_back(s);
      }
      if (cfg.representations.empty()) {
        throw ParseError("config: no representations");
      }
    } else if (key == "samples") {
      cfg.samples = static_cast<std::size_t>(parse_int(key, value));
    } else if (key == "coverage_samples") {
      cfg.coverage_samples = static_cast<std::size_t>(parse_int(key, value));
    } else if (key == "coverage_tol") {
      cfg.coverage_tol = parse_num(key, value);
    } else if (key == "voxels") {
      cfg.voxels = static_cast<int>(parse_int(key, value));
    } else if (key == "iou_voxels") {
      cfg.iou_voxels = static_cast<int>(parse_int(key, value));
    } else if (key == "seed") {
      cfg.seed = static_cast<std::uint64_t>(parse_int(key, value));
    } else if (key == "workers") {
      cfg.workers = std::max(1, static_cast<int>(parse_int(key, value)));
    } else if (key == "fuse_rule") {
      if (value == "intersection") cfg.fuse_rule = FuseRule::kIntersection;
      else if (value == "majority") cfg.fuse_rule = FuseRule::kMajority;
      else if (value == "union") cfg.fuse_rule = FuseRule::kUnion;
      else throw ParseError("config fuse_rule: unknown '" + value + "'");
    } else if (key == "mu") {
      cfg.weights.mu = parse_num(key, value);
    } else if (key == "zeta") {
      cfg.weights.zeta = parse_num(key, value);
    } else if (key == "alpha") {
      cfg.weights.alpha = parse_num(key, value);
    } else if (key == "beta") {
      cfg.weights.beta = parse_num(key, value);
    } else if (key == "highpass_radius_frac") {
      cfg.weights.highpass_radius_frac = parse_num(key, value);
    } else if (key == "sobel_threshold_frac") {
      cfg.weights.sobel_threshold_frac = parse_num(key, value);
    } else if (key == "margin") {
      cfg.weights.margin = static_cast<int>(parse_int(key, value));
    } else if (key == "discontinuity_tol") {
      cfg.discontinuity_tol = parse_num(key, value);
    } else {
      throw ParseError("config: unknown key '" + key + "'");
    }
  }
}

std::map<std::string, std::string> config_echo(const HarnessConfig& cfg) {
  std::map<std::string, std::string> kv;
  std::string res;
  for (const auto& [H, W] : cfg.resolutions) {
    if (!res.empty()) res += ",";
    res += std::to_string(H) + "x" + std::to_string(W);
  }
  kv["resolutions"] = res;
  std::string layers;
  for (int k : cfg.layer_counts) {
    if (!layers.empty()) layers += ",";
    layers += std::to_string(k);
  }
  kv["layers"] = layers;
  std::string reps;
  for (const std::string& r : cfg.representations) {
    if (!reps.empty()) reps += ",";
    reps += r;
  }
  kv["representations"] = reps;
  kv["samples"] = std::to_string(cfg.samples);
  kv["coverage_samples"] = std::to_string(cfg.coverage_samples);
  kv["coverage_tol"] = format_double(cfg.coverage_tol);
  kv["voxels"] = std::to_string(cfg.voxels);
  kv["iou_voxels"] = std::to_string(cfg.iou_voxels);
  kv["seed"] = std::to_string(cfg.seed);
  // workers deliberately omitted: execution detail, results are identical
  // for any worker count and reports must be too.
  kv["fuse_rule"] = fuse_rule_name(cfg.fuse_rule);
  kv["mu"] = format_double(cfg.weights.mu);
  kv["zeta"] = format_double(cfg.weights.zeta);
  kv["alpha"] = format_double(cfg.weights.alpha);
  kv["beta"] = format_double(cfg.weights.beta);
  kv["highpass_radius_frac"] = format_double(cfg.weights.highpass_radius_frac);
  kv["sobel_threshold_frac"] = format_double(cfg.weights.sobel_threshold_frac);
  kv["margin"] = std::to_string(cfg.weights.margin);
  kv["discontinuity_tol"] = format_double(cfg.discontinuity_tol);
  return kv;
}

std::vector<CorpusEntry> default_corpus() {
  std::vector<CorpusEntry> corpus;
  for (const FixtureSpec& f : fixture_corpus()) {
    corpus.push_back({f.id, std::string("fixture:") + f.id, f.watertight});
  }
  return corpus;
}

std::vector<CorpusEntry> load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FileNotFound(path + ": cannot open manifest");
  std::vector<CorpusEntry> corpus;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::string t = trim(line);
    if (t.empty()) continue;
    std::vector<std::string> parts = split(t, ',');
    if (parts.size() != 3) {
      throw ParseError(path + ":" + std::to_string(lineno) +
                       ": expected id,path,watertight");
    }
    CorpusEntry e;
    e.id = parts[0];
    e.path = parts[1];
    if (parts[2] == "1" || parts[2] == "true") e.watertight = true;
    else if (parts[2] == "0" || parts[2] == "false") e.watertight = false;
    else {
      throw ParseError(path + ":" + std::to_string(lineno) +
                       ": watertight must be 0/1/true/false");
    }
    if (e.id.empty() || e.path.empty()) {
      throw ParseError(path + ":" + std::to_string(lineno) + ": empty field");
    }
    for (const CorpusEntry& prev : corpus) {
      if (prev.id == e.id) {
        throw ParseError(path + ": duplicate mesh id '" + e.id + "'");
      }
    }
    corpus.push_back(e);
  }
  return corpus;
}

TriangleMesh load_corpus_mesh(const std::string& path) {
  if (path.rfind("fixture:", 0) == 0) {
    return make_fixture(path.substr(8));
  }
  return load_mesh(path);
}

std::string csv_header() {
  return "mesh_id,representation,resolution,k,chamfer,vol_iou,f_score,"
         "storage_raw,storage_deflated,seam_abs_rel,polar_abs_rel,"
         "equator_abs_rel,truncation_count,l1,l_edge,l_spec,l_total";
}

namespace {

std::string csv_num(double v) {
  if (std::isnan(v)) return "";
  return format_double(v);
}

}  // namespace

std::string csv_line(const ReportRow& r) {
  std::ostringstream o;
  o << r.mesh_id << ',' << r.representation << ',' << r.H << 'x' << r.W << ','
    << r.k << ',' << csv_num(r.chamfer) << ',' << csv_num(r.vol_iou) << ','
    << csv_num(r.f_score) << ',' << r.storage_raw << ',' << r.storage_deflated
    << ',' << csv_num(r.seam_abs_rel) << ',' << csv_num(r.polar_abs_rel)
    << ',' << csv_num(r.equator_abs_rel) << ',' << r.truncation_count << ','
    << csv_num(r.l1) << ',' << csv_num(r.l_edge) << ',' << csv_num(r.l_spec)
    << ',' << csv_num(r.l_total);
  return o.str();
}

namespace {

SpMap cached_encode(const TriangleMesh& norm, const EncodeConfig& ec,
                    const std::string& cache_dir, std::uint64_t mhash) {
  std::string key;
  if (!cache_dir.empty()) {
    std::string cfgstr = "sp|" + std::to_string(ec.grid.H) + "x" +
                         std::to_string(ec.grid.W) + "|k" +
                         std::to_string(ec.k) + "|seed" +
                         std::to_string(ec.seed) + "|pc" +
                         format_double(ec.parallel_cos_threshold) + "|ps" +
                         format_double(ec.perturb_sigma) + "|n" +
                         (ec.store_normals ? "1" : "0");
    key = cache_dir + "/" + hex64(mhash) + "_" + hex64(fnv1a64(cfgstr)) +
          ".spm";
    if (std::filesystem::exists(key)) {
      SpMap cached = read_spm(key);
      if (cached.source_hash == mhash && cached.grid.H == ec.grid.H &&
          cached.grid.W == ec.grid.W && cached.k == ec.k) {
        return cached;
      }
    }
  }
  SpMap map = encode(norm, ec);
  if (!key.empty()) write_spm(map, key);
  return map;
}

NestedStacks cached_encode_nested(const TriangleMesh& norm,
                                  const NestedConfig& nc,
                                  const std::string& cache_dir,
                                  std::uint64_t mhash) {
  std::string key;
  if (!cache_dir.empty()) {
    std::string cfgstr = "nested|" + std::to_string(nc.N) + "|k" +
                         std::to_string(nc.k) + "|seed" +
                         std::to_string(nc.seed) + "|pc" +
                         format_double(nc.parallel_cos_threshold) + "|ps" +
                         format_double(nc.perturb_sigma);
    key = cache_dir + "/" + hex64(mhash) + "_" + hex64(fnv1a64(cfgstr)) +
          ".spn";
    if (std::filesystem::exists(key)) {
      NestedStacks cached = read_spn(key);
      if (cached.source_hash == mhash && cached.stacks[0].N == nc.N &&
          cached.stacks[0].k == nc.k) {
        return cached;
      }
    }
  }
  NestedStacks st = encode_nested(norm, nc);
  if (!key.empty()) write_spn(key, st);
  return st;
}

}  // namespace

RoundtripResult run_roundtrip(const TriangleMesh& mesh,
                              const std::string& mesh_id, bool watertight,
                              const std::string& representation, int H, int W,
                              int k, const HarnessConfig& cfg,
                              const std::string& cache_dir) {
  if (representation != "sp" && representation != "nested") {
    throw ParseError("unknown representation '" + representation + "'");
  }
  RoundtripResult out;
  ReportRow& row = out.row;
  row.mesh_id = mesh_id;
  row.representation = representation;
  row.k = k;

  TriangleMesh norm = mesh;
  normalize_mesh(norm);
  std::uint64_t mhash = mesh_hash(norm);

  TriangleMesh recon;
  SpMap map;  // sp only
  bool have_map = false;
  if (representation == "sp") {
    row.H = H;
    row.W = W;
    EncodeConfig ec;
    ec.grid = SphericalGrid(H, W);
    ec.k = k;
    ec.seed = cfg.seed;
    ec.workers = cfg.workers;
    map = cached_encode(norm, ec, cache_dir, mhash);
    have_map = true;
    row.storage_raw = storage_bytes(map, StorageMode::kRaw);
    row.storage_deflated = storage_bytes(map, StorageMode::kDeflated);
    row.truncation_count = map.truncated_pixels;
    row.coverage = coverage(norm, map, cfg.coverage_samples, cfg.coverage_tol,
                            cfg.seed);
    if (watertight) {
      OccupancyGrid occ =
          occupancy_from_map(map, auto_voxels(cfg, H), cfg.workers);
      recon = marching_cubes(occ);
    } else {
      recon = grid_triangulate(map, cfg.discontinuity_tol);
    }
  } else {
    int N = H;
    row.H = N;
    row.W = N;
    NestedConfig nc;
    nc.N = N;
    nc.k = k;
    nc.seed = cfg.seed;
    nc.workers = cfg.workers;
    NestedStacks st = cached_encode_nested(norm, nc, cache_dir, mhash);
    std::vector<std::uint8_t> bytes = spn_bytes(st);
    row.storage_raw = bytes.size();
    row.storage_deflated = deflated_size(bytes);
    row.truncation_count = st.truncated_pixels;
    recon = reconstruct_nested(st, auto_voxels(cfg, N), cfg.fuse_rule,
                               cfg.workers);
  }

  TriangleMesh src_unit = norm;
  normalize_unit(src_unit);
  TriangleMesh rec_unit = recon;
  normalize_unit(rec_unit);
  std::vector<Vec3> pr = sample_surface(rec_unit, cfg.samples, cfg.seed);
  std::vector<Vec3> ps = sample_surface(src_unit, cfg.samples, cfg.seed + 1);
  row.chamfer = chamfer(pr, ps);
  row.f_score = f_score(pr, ps);
  if (watertight) {
    row.vol_iou = volume_iou(rec_unit, src_unit, cfg.iou_voxels, cfg.workers);
  }

  if (have_map) {
    // encode -> decode -> re-encode: compare the reconstruction's map
    // against the source map in map space.
    TriangleMesh renorm = recon;
    normalize_mesh(renorm);
    EncodeConfig ec2;
    ec2.grid = map.grid;
    ec2.k = k;
    ec2.seed = cfg.seed;
    ec2.workers = cfg.workers;
    SpMap remap = encode(renorm, ec2);
    row.seam_abs_rel = regional_abs_rel(remap, map, Region::kSeam);
    row.polar_abs_rel = regional_abs_rel(remap, map, Region::kPolar);
    row.equator_abs_rel = regional_abs_rel(remap, map, Region::kEquator);
    QualityBreakdown q = combined_quality(remap, map, cfg.weights);
    row.l1 = q.l1;
    row.l_edge = q.l_edge;
    row.l_spec = q.l_spec;
    row.l_total = q.total;
  }
  out.reconstructed = std::move(recon);
  return out;
}

namespace {

struct JsonWriter {
  std::ostringstream o;
  void kv_raw(int indent, const std::string& key, const std::string& raw,
              bool comma) {
    o << std::string(indent, ' ') << '"' << json_escape(key) << "\": " << raw
      << (comma ? ",\n" : "\n");
  }
  void kv_str(int indent, const std::string& key, const std::string& s,
              bool comma) {
    kv_raw(indent, key, "\"" + json_escape(s) + "\"", comma);
  }
};

std::string config_json(const HarnessConfig& cfg, int indent) {
  std::map<std::string, std::string> kv = config_echo(cfg);
  std::ostringstream o;
  o << "{\n";
  std::size_t i = 0;
  for (const auto& [key, value] : kv) {
    o << std::string(indent + 2, ' ') << '"' << json_escape(key) << "\": \""
      << json_escape(value) << '"' << (++i < kv.size() ? ",\n" : "\n");
  }
  o << std::string(indent, ' ') << "}";
  return o.str();
}

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double median_of(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  std::size_t n = v.size();
  if (n % 2 == 1) return v[n / 2];
  return 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

std::string roundtrip_report_json(const HarnessConfig& cfg,
                                  const ReportRow& row) {
  JsonWriter w;
  w.o << "{\n";
  w.kv_str(2, "chamfer_convention", kChamferConvention, true);
  w.kv_raw(2, "config", config_json(cfg, 2), true);
  w.o << "  \"row\": {\n";
  w.kv_str(4, "mesh_id", row.mesh_id, true);
  w.kv_str(4, "representation", row.representation, true);
  w.kv_str(4, "resolution",
           std::to_string(row.H) + "x" + std::to_string(row.W), true);
  w.kv_raw(4, "k", std::to_string(row.k), true);
  w.kv_raw(4, "chamfer", json_num(row.chamfer), true);
  w.kv_raw(4, "vol_iou", json_num(row.vol_iou), true);
  w.kv_raw(4, "f_score", json_num(row.f_score), true);
  w.kv_raw(4, "storage_raw", std::to_string(row.storage_raw), true);
  w.kv_raw(4, "storage_deflated", std::to_string(row.storage_deflated), true);
  w.kv_raw(4, "seam_abs_rel", json_num(row.seam_abs_rel), true);
  w.kv_raw(4, "polar_abs_rel", json_num(row.polar_abs_rel), true);
  w.kv_raw(4, "equator_abs_rel", json_num(row.equator_abs_rel), true);
  w.kv_raw(4, "truncation_count", std::to_string(row.truncation_count), true);
  w.kv_raw(4, "l1", json_num(row.l1), true);
  w.kv_raw(4, "l_edge", json_num(row.l_edge), true);
  w.kv_raw(4, "l_spec", json_num(row.l_spec), true);
  w.kv_raw(4, "l_total", json_num(row.l_total), true);
  w.kv_raw(4, "coverage", json_num(row.coverage), false);
  w.o << "  }\n}\n";
  return w.o.str();
}

SweepOutput run_sweep(const std::vector<CorpusEntry>& corpus,
                      const HarnessConfig& cfg, const std::string& out_dir) {
  if (corpus.empty()) throw ParseError("sweep: empty corpus");
  if (cfg.resolutions.empty() || cfg.layer_counts.empty() ||
      cfg.representations.empty()) {
    throw ParseError("sweep: empty resolutions/layers/representations");
  }
  for (const std::string& rep : cfg.representations) {
    if (rep != "sp") continue;
    for (const auto& [H, W] : cfg.resolutions) {
      if (W != 2 * H) {
        throw ParseError("sweep: sp resolution " + std::to_string(H) + "x" +
                         std::to_string(W) + " must keep W = 2H");
      }
    }
  }
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    for (std::size_t j = i + 1; j < corpus.size(); ++j) {
      if (corpus[i].id == corpus[j].id) {
        throw ParseError("sweep: duplicate mesh id '" + corpus[i].id + "'");
      }
    }
  }

  std::string cache_dir;
  if (!out_dir.empty()) {
    cache_dir = out_dir + "/cache";
    std::filesystem::create_directories(cache_dir);
  }

  SweepOutput out;
  for (const CorpusEntry& entry : corpus) {
    TriangleMesh mesh;
    try {
      mesh = load_corpus_mesh(entry.path);
    } catch (const Error& e) {
      out.failures.push_back({entry.id, "-", 0, 0, 0, e.what()});
      std::cerr << "[sweep] " << entry.id << ": load failed: " << e.what()
                << "\n";
      continue;
    }
    for (const std::string& rep : cfg.representations) {
      for (const auto& [H, W] : cfg.resolutions) {
        for (int k : cfg.layer_counts) {
          auto t0 = std::chrono::steady_clock::now();
          try {
            RoundtripResult rr = run_roundtrip(mesh, entry.id,
                                               entry.watertight, rep, H, W, k,
                                               cfg, cache_dir);
            out.rows.push_back(rr.row);
          } catch (const Error& e) {
            int rw = rep == "nested" ? H : W;
            out.failures.push_back({entry.id, rep, H, rw, k, e.what()});
          }
          auto t1 = std::chrono::steady_clock::now();
          std::cerr << "[sweep] " << entry.id << " " << rep << " " << H << "x"
                    << (rep == "nested" ? H : W) << " k" << k << ": "
                    << std::chrono::duration<double>(t1 - t0).count()
                    << "s\n";
        }
      }
    }
  }

  auto row_key = [](const ReportRow& r) {
    return std::make_tuple(r.mesh_id, r.representation, r.H, r.k);
  };
  std::sort(out.rows.begin(), out.rows.end(),
            [&](const ReportRow& a, const ReportRow& b) {
              return row_key(a) < row_key(b);
            });
  std::sort(out.failures.begin(), out.failures.end(),
            [](const SweepFailure& a, const SweepFailure& b) {
              return std::make_tuple(a.mesh_id, a.representation, a.H, a.k) <
                     std::make_tuple(b.mesh_id, b.representation, b.H, b.k);
            });

  std::ostringstream csv;
  csv << csv_header() << "\n";
  for (const ReportRow& r : out.rows) csv << csv_line(r) << "\n";
  out.csv = csv.str();

  // Aggregate cells in a fixed factorial order.
  JsonWriter w;
  w.o << "{\n";
  w.kv_str(2, "chamfer_convention", kChamferConvention, true);
  w.kv_raw(2, "config", config_json(cfg, 2), true);
  w.o << "  \"cells\": [\n";
  bool first_cell = true;
  for (const std::string& rep : cfg.representations) {
    for (const auto& [H, W] : cfg.resolutions) {
      for (int k : cfg.layer_counts) {
        int cw = rep == "nested" ? H : W;
        std::vector<double> cd, iou, fs, raw, defl, cov;
        std::size_t nrows = 0, truncated_rows = 0;
        for (const ReportRow& r : out.rows) {
          if (r.representation != rep || r.H != H || r.W != cw || r.k != k)
            continue;
          ++nrows;
          if (r.truncation_count > 0) ++truncated_rows;
          if (!std::isnan(r.chamfer)) cd.push_back(r.chamfer);
          if (!std::isnan(r.vol_iou)) iou.push_back(r.vol_iou);
          if (!std::isnan(r.f_score)) fs.push_back(r.f_score);
          raw.push_back(static_cast<double>(r.storage_raw));
          defl.push_back(static_cast<double>(r.storage_deflated));
          if (!std::isnan(r.coverage)) cov.push_back(r.coverage);
        }
        if (!first_cell) w.o << ",\n";
        first_cell = false;
        w.o << "    {\n";
        w.kv_str(6, "representation", rep, true);
        w.kv_str(6, "resolution",
                 std::to_string(H) + "x" + std::to_string(cw), true);
        w.kv_raw(6, "k", std::to_string(k), true);
        w.kv_raw(6, "rows", std::to_string(nrows), true);
        w.kv_raw(6, "expected", std::to_string(corpus.size()), true);
        w.kv_raw(6, "complete", nrows == corpus.size() ? "true" : "false",
                 true);
        w.kv_raw(6, "truncated_rows", std::to_string(truncated_rows), true);
        w.kv_raw(6, "chamfer_mean", json_num(mean_of(cd)), true);
        w.kv_raw(6, "chamfer_median", json_num(median_of(cd)), true);
        w.kv_raw(6, "vol_iou_mean", json_num(mean_of(iou)), true);
        w.kv_raw(6, "f_score_mean", json_num(mean_of(fs)), true);
        w.kv_raw(6, "storage_raw_mean", json_num(mean_of(raw)), true);
        w.kv_raw(6, "storage_deflated_mean", json_num(mean_of(defl)), true);
        w.kv_raw(6, "coverage_mean", json_num(mean_of(cov)), false);
        w.o << "    }";
      }
    }
  }
  w.o << "\n  ],\n";
  w.o << "  \"failures\": [\n";
  for (std::size_t i = 0; i < out.failures.size(); ++i) {
    const SweepFailure& f = out.failures[i];
    w.o << "    {\n";
    w.kv_str(6, "mesh_id", f.mesh_id, true);
    w.kv_str(6, "representation", f.representation, true);
    w.kv_str(6, "resolution", std::to_string(f.H) + "x" + std::to_string(f.W),
             true);
    w.kv_raw(6, "k", std::to_string(f.k), true);
    w.kv_str(6, "error", f.error, false);
    w.o << "    }" << (i + 1 < out.failures.size() ? ",\n" : "\n");
  }
  w.o << "  ],\n";
  w.kv_raw(2, "row_count", std::to_string(out.rows.size()), false);
  w.o << "}\n";
  out.summary_json = w.o.str();

  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    std::ofstream csvf(out_dir + "/report.csv", std::ios::binary);
    if (!csvf) throw IoError(out_dir + "/report.csv: cannot open for write");
    csvf << out.csv;
    std::ofstream jf(out_dir + "/summary.json", std::ios::binary);
    if (!jf) throw IoError(out_dir + "/summary.json: cannot open for write");
    jf << out.summary_json;
  }
  return out;
}

}  // namespace spmap
