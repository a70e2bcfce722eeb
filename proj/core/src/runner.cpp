#include "simperc/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "simperc/delaunay.hpp"
#include "simperc/enhancement.hpp"
#include "simperc/osss.hpp"
#include "simperc/percolation.hpp"
#include "simperc/point_process.hpp"
#include "simperc/random.hpp"
#include "simperc/stats.hpp"

namespace simperc {

namespace {

using nlohmann::json;

std::string hex16(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(v));
  return std::string(buf);
}

std::string num(double v, const char* fmt = "%.17g") {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, v);
  return std::string(buf);
}

// Filename-safe rendering of a grid value: 2.5 -> "2p5", -1 -> "m1".
std::string slug(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  std::string out;
  for (const char* p = buf; *p; ++p) {
    if (*p == '.') {
      out += 'p';
    } else if (*p == '-') {
      out += 'm';
    } else if (*p != '+') {
      out += *p;
    }
  }
  return out;
}

struct CellPaths {
  std::string summary;
  std::string csv;
};

CellPaths cell_paths(const ExperimentConfig& config, double lambda,
                     double radius, std::uint64_t hash) {
  std::string base = std::string("cell_") + to_string(config.kind) + "_lam" +
                     slug(lambda) + "_rad" + slug(radius) + "_" + hex16(hash);
  CellPaths paths;
  paths.summary = config.out_dir + "/" + base + ".summary.json";
  paths.csv = config.out_dir + "/" + base + ".replicas.csv";
  return paths;
}

bool cell_complete(const CellPaths& paths, std::uint64_t hash) {
  std::ifstream in(paths.summary);
  if (!in) return false;
  try {
    json j = json::parse(in);
    if (j.at("hash").get<std::string>() != hex16(hash)) return false;
  } catch (...) {
    return false;
  }
  return std::filesystem::exists(paths.csv);
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("runner: cannot write '" + path + "'");
  out << text;
  out.flush();
  if (!out) throw std::runtime_error("runner: write failed for '" + path + "'");
}

// Static contiguous partition of [0, replicas) into at most `workers`
// blocks. Replica indices, not block boundaries, drive every random
// stream, so results do not depend on the partition.
std::uint64_t block_count(std::uint64_t replicas, int workers) {
  std::uint64_t nw = static_cast<std::uint64_t>(std::max(workers, 1));
  return std::max<std::uint64_t>(std::min(nw, replicas), 1);
}

void parallel_blocks(
    std::uint64_t replicas, int workers,
    const std::function<void(std::uint64_t, std::uint64_t, std::uint64_t)>&
        fn) {
  const std::uint64_t nw = block_count(replicas, workers);
  if (nw <= 1) {
    fn(0, 0, replicas);
    return;
  }
  const std::uint64_t q = replicas / nw;
  const std::uint64_t rem = replicas % nw;
  std::vector<std::thread> threads;
  std::vector<std::exception_ptr> errors(nw);
  std::uint64_t off = 0;
  for (std::uint64_t b = 0; b < nw; ++b) {
    const std::uint64_t cnt = q + (b < rem ? 1 : 0);
    threads.emplace_back([&fn, &errors, b, off, cnt] {
      try {
        fn(b, off, cnt);
      } catch (...) {
        errors[b] = std::current_exception();
      }
    });
    off += cnt;
  }
  for (auto& t : threads) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

double elapsed_ms(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(
             std::chrono::steady_clock::now() - t0)
      .count();
}

json ci_json(const WilsonInterval& ci) { return json::array({ci.lo, ci.hi}); }

json count_json(std::uint64_t count, std::uint64_t replicas) {
  json j;
  j["count"] = count;
  j["estimate"] =
      replicas ? static_cast<double>(count) / static_cast<double>(replicas)
               : 0.0;
  j["ci"] = ci_json(wilson_interval(count, replicas));
  return j;
}

json scientific_config_json(const ExperimentConfig& config) {
  json j = json::parse(config_to_json_text(config));
  j.erase("out_dir");
  j.erase("workers");
  return j;
}

// Worker count and output directory are excluded so the summary bytes
// match across re-parallelized or relocated reruns.
json summary_base(const ExperimentConfig& config, double lambda,
                  double radius, std::uint64_t hash) {
  json j;
  j["artifact"] = kArtifactVersion;
  j["kind"] = to_string(config.kind);
  j["hash"] = hex16(hash);
  j["cell"] = json{{"lambda", lambda}, {"radius", radius}};
  j["config"] = scientific_config_json(config);
  return j;
}

std::string csv_text(const std::string& header,
                     const std::vector<std::string>& rows) {
  std::string out = header;
  out += '\n';
  for (const std::string& row : rows) {
    out += row;
    out += '\n';
  }
  return out;
}

std::string replica_prefix(const ExperimentConfig& config, std::uint64_t rep) {
  return std::to_string(rep) + "," +
         std::to_string(
             derive_seed(config.root_seed, StreamTag::kPointProcess, rep));
}

std::string ms_field(const std::vector<double>& ms, std::uint64_t rep) {
  if (ms.empty()) return std::string();
  return num(ms[rep], "%.3f");
}

[[noreturn]] void containment_violation(const char* what) {
  throw std::logic_error(std::string("runner: event containment violated: ") +
                         what);
}

// ---------------------------------------------------------------------
// theta and crossing cells (the two kinds that support coupling)

struct IndicatorSeries {
  std::vector<std::uint8_t> primary;  // theta indicator, or face crossing
  std::vector<std::uint8_t> star;     // crossing only
  std::vector<std::int32_t> n_points;
  std::vector<double> ms;

  void resize(std::uint64_t replicas, bool with_star, bool timings) {
    primary.assign(replicas, 0);
    if (with_star) star.assign(replicas, 0);
    n_points.assign(replicas, 0);
    if (timings) ms.assign(replicas, 0.0);
  }
};

ExperimentRecord record_from(const std::vector<std::uint8_t>& ind,
                             const std::vector<std::int32_t>& n_points) {
  ExperimentRecord rec;
  rec.replicas = ind.size();
  rec.indicators = ind;
  rec.n_points = n_points;
  for (std::uint8_t v : ind) rec.successes += v;
  rec.estimate = rec.replicas ? static_cast<double>(rec.successes) /
                                    static_cast<double>(rec.replicas)
                              : 0.0;
  rec.ci = wilson_interval(rec.successes, rec.replicas);
  return rec;
}

double theta_reach_of(const std::vector<Point>& raw_points, int D, int d) {
  std::vector<Point> pts = raw_points;
  pts.push_back(Point::Zero(D));
  GridIndex grid(pts);
  return theta_reach(pts, grid, d, static_cast<int>(pts.size()) - 1);
}

// Uncoupled theta cell; replica for replica this is exactly
// theta_estimate, so the CSV indicators are bitwise comparable to it.
IndicatorSeries theta_cell_plain(const ExperimentConfig& config, double lambda,
                                 double r, int workers, bool timings) {
  Region window = Region::ball(Point::Zero(config.D), r + 2.0);
  IndicatorSeries out;
  out.resize(config.replicas, false, timings);
  parallel_blocks(config.replicas, workers,
                  [&](std::uint64_t, std::uint64_t off, std::uint64_t cnt) {
    for (std::uint64_t rep = off; rep < off + cnt; ++rep) {
      auto t0 = std::chrono::steady_clock::now();
      Realization real =
          sample_poisson(window, lambda, config.root_seed, rep);
      out.primary[rep] = theta_indicator(real, config.d, r) ? 1 : 0;
      out.n_points[rep] = static_cast<std::int32_t>(real.points().size());
      if (timings) out.ms[rep] = elapsed_ms(t0);
    }
  });
  return out;
}

// All radii on one shared realization per replica; a single reach pass
// serves the whole grid and is nonincreasing in r by construction.
std::vector<IndicatorSeries> theta_cells_radius_coupled(
    const ExperimentConfig& config, double lambda, int workers, bool timings) {
  const std::vector<double>& rs = config.radius_grid;
  const double r_max = *std::max_element(rs.begin(), rs.end());
  Region window = Region::ball(Point::Zero(config.D), r_max + 2.0);
  std::vector<IndicatorSeries> cells(rs.size());
  for (auto& c : cells) c.resize(config.replicas, false, timings);
  parallel_blocks(config.replicas, workers,
                  [&](std::uint64_t, std::uint64_t off, std::uint64_t cnt) {
    for (std::uint64_t rep = off; rep < off + cnt; ++rep) {
      auto t0 = std::chrono::steady_clock::now();
      Realization real =
          sample_poisson(window, lambda, config.root_seed, rep);
      const double reach = theta_reach_of(real.points(), config.D, config.d);
      const auto n = static_cast<std::int32_t>(real.points().size());
      const double ms = timings ? elapsed_ms(t0) : 0.0;
      for (std::size_t k = 0; k < rs.size(); ++k) {
        const bool hit = reach > rs[k];
        if (k > 0 && hit && !(reach > rs[k - 1])) {
          containment_violation("theta not monotone in r");
        }
        cells[k].primary[rep] = hit ? 1 : 0;
        cells[k].n_points[rep] = n;
        if (timings) cells[k].ms[rep] = ms;
      }
    }
  });
  return cells;
}

// Superposition coupling: the cell at the smallest intensity is the plain
// sample; each further cell adds an independent increment, so indicators
// are nondecreasing along the grid.
std::vector<IndicatorSeries> theta_cells_lambda_coupled(
    const ExperimentConfig& config, double r, int workers, bool timings) {
  const std::vector<double>& ls = config.lambda_grid;
  Region window = Region::ball(Point::Zero(config.D), r + 2.0);
  std::vector<IndicatorSeries> cells(ls.size());
  for (auto& c : cells) c.resize(config.replicas, false, timings);
  parallel_blocks(config.replicas, workers,
                  [&](std::uint64_t, std::uint64_t off, std::uint64_t cnt) {
    for (std::uint64_t rep = off; rep < off + cnt; ++rep) {
      auto t0 = std::chrono::steady_clock::now();
      std::vector<Point> pts =
          sample_poisson(window, ls[0], config.root_seed, rep).points();
      bool prev = false;
      for (std::size_t k = 0; k < ls.size(); ++k) {
        if (k > 0) {
          RngStream inc = derive_stream(config.root_seed,
                                        StreamTag::kSuperpose, rep, k);
          std::vector<Point> extra =
              poisson_points(window, ls[k] - ls[k - 1], inc);
          pts.insert(pts.end(), extra.begin(), extra.end());
        }
        const bool hit =
            theta_reach_of(pts, config.D, config.d) > r;
        if (k > 0 && prev && !hit) {
          containment_violation("theta not monotone in lambda");
        }
        prev = hit;
        cells[k].primary[rep] = hit ? 1 : 0;
        cells[k].n_points[rep] = static_cast<std::int32_t>(pts.size());
        if (timings) cells[k].ms[rep] = elapsed_ms(t0);
      }
    }
  });
  return cells;
}

void eval_crossing(const std::vector<Point>& pts, int d, double n, double r0,
                   std::uint8_t& face, std::uint8_t& star) {
  GridIndex grid(pts);
  const bool f = crossing_face(pts, grid, d, n);
  const bool s = crossing_star(pts, grid, d, n, r0);
  if (f && !s) containment_violation("face without star");
  face = f ? 1 : 0;
  star = s ? 1 : 0;
}

IndicatorSeries crossing_cell_plain(const ExperimentConfig& config,
                                    double lambda, double n, int workers,
                                    bool timings) {
  Region window = Region::ball(Point::Zero(config.D), n + 2.0 + config.r0);
  IndicatorSeries out;
  out.resize(config.replicas, true, timings);
  parallel_blocks(config.replicas, workers,
                  [&](std::uint64_t, std::uint64_t off, std::uint64_t cnt) {
    for (std::uint64_t rep = off; rep < off + cnt; ++rep) {
      auto t0 = std::chrono::steady_clock::now();
      Realization real =
          sample_poisson(window, lambda, config.root_seed, rep);
      eval_crossing(real.points(), config.d, n, config.r0, out.primary[rep],
                    out.star[rep]);
      out.n_points[rep] = static_cast<std::int32_t>(real.points().size());
      if (timings) out.ms[rep] = elapsed_ms(t0);
    }
  });
  return out;
}

std::vector<IndicatorSeries> crossing_cells_radius_coupled(
    const ExperimentConfig& config, double lambda, int workers, bool timings) {
  const std::vector<double>& ns = config.radius_grid;
  const double n_max = *std::max_element(ns.begin(), ns.end());
  Region window = Region::ball(Point::Zero(config.D), n_max + 2.0 + config.r0);
  std::vector<IndicatorSeries> cells(ns.size());
  for (auto& c : cells) c.resize(config.replicas, true, timings);
  parallel_blocks(config.replicas, workers,
                  [&](std::uint64_t, std::uint64_t off, std::uint64_t cnt) {
    for (std::uint64_t rep = off; rep < off + cnt; ++rep) {
      auto t0 = std::chrono::steady_clock::now();
      Realization real =
          sample_poisson(window, lambda, config.root_seed, rep);
      GridIndex grid(real.points());
      const auto np = static_cast<std::int32_t>(real.points().size());
      for (std::size_t k = 0; k < ns.size(); ++k) {
        const bool f = crossing_face(real.points(), grid, config.d, ns[k]);
        const bool s =
            crossing_star(real.points(), grid, config.d, ns[k], config.r0);
        if (f && !s) containment_violation("face without star");
        if (k > 0) {
          if (f && !cells[k - 1].primary[rep]) {
            containment_violation("face crossing not monotone in n");
          }
          if (s && !cells[k - 1].star[rep]) {
            containment_violation("star crossing not monotone in n");
          }
        }
        cells[k].primary[rep] = f ? 1 : 0;
        cells[k].star[rep] = s ? 1 : 0;
        cells[k].n_points[rep] = np;
        if (timings) cells[k].ms[rep] = elapsed_ms(t0);
      }
    }
  });
  return cells;
}

std::vector<IndicatorSeries> crossing_cells_lambda_coupled(
    const ExperimentConfig& config, double n, int workers, bool timings) {
  const std::vector<double>& ls = config.lambda_grid;
  Region window = Region::ball(Point::Zero(config.D), n + 2.0 + config.r0);
  std::vector<IndicatorSeries> cells(ls.size());
  for (auto& c : cells) c.resize(config.replicas, true, timings);
  parallel_blocks(config.replicas, workers,
                  [&](std::uint64_t, std::uint64_t off, std::uint64_t cnt) {
    for (std::uint64_t rep = off; rep < off + cnt; ++rep) {
      auto t0 = std::chrono::steady_clock::now();
      std::vector<Point> pts =
          sample_poisson(window, ls[0], config.root_seed, rep).points();
      for (std::size_t k = 0; k < ls.size(); ++k) {
        if (k > 0) {
          RngStream inc = derive_stream(config.root_seed,
                                        StreamTag::kSuperpose, rep, k);
          std::vector<Point> extra =
              poisson_points(window, ls[k] - ls[k - 1], inc);
          pts.insert(pts.end(), extra.begin(), extra.end());
        }
        eval_crossing(pts, config.d, n, config.r0, cells[k].primary[rep],
                      cells[k].star[rep]);
        if (k > 0) {
          if (cells[k - 1].primary[rep] && !cells[k].primary[rep]) {
            containment_violation("face crossing not monotone in lambda");
          }
          if (cells[k - 1].star[rep] && !cells[k].star[rep]) {
            containment_violation("star crossing not monotone in lambda");
          }
        }
        cells[k].n_points[rep] = static_cast<std::int32_t>(pts.size());
        if (timings) cells[k].ms[rep] = elapsed_ms(t0);
      }
    }
  });
  return cells;
}

void write_theta_cell(const ExperimentConfig& config, double lambda, double r,
                      const IndicatorSeries& series, const CellPaths& paths,
                      std::uint64_t hash, bool timings, double cell_ms) {
  std::vector<std::string> rows(config.replicas);
  for (std::uint64_t rep = 0; rep < config.replicas; ++rep) {
    rows[rep] = replica_prefix(config, rep) + "," +
                std::to_string(series.primary[rep]) + "," +
                std::to_string(series.n_points[rep]) + "," +
                ms_field(series.ms, rep);
  }
  write_text_file(paths.csv,
                  csv_text("replica,seed,indicator,n_points,runtime_ms", rows));

  ExperimentRecord rec = record_from(series.primary, series.n_points);
  json j = summary_base(config, lambda, r, hash);
  j["replicas"] = rec.replicas;
  j["successes"] = rec.successes;
  j["estimate"] = rec.estimate;
  j["ci"] = ci_json(rec.ci);
  if (timings) j["runtime_ms"] = cell_ms;
  write_text_file(paths.summary, j.dump(2) + "\n");
}

void write_crossing_cell(const ExperimentConfig& config, double lambda,
                         double n, const IndicatorSeries& series,
                         const CellPaths& paths, std::uint64_t hash,
                         bool timings, double cell_ms) {
  std::vector<std::string> rows(config.replicas);
  for (std::uint64_t rep = 0; rep < config.replicas; ++rep) {
    rows[rep] = replica_prefix(config, rep) + "," +
                std::to_string(series.primary[rep]) + "," +
                std::to_string(series.star[rep]) + "," +
                std::to_string(series.n_points[rep]) + "," +
                ms_field(series.ms, rep);
  }
  write_text_file(paths.csv,
                  csv_text("replica,seed,face,star,n_points,runtime_ms", rows));

  ExperimentRecord face = record_from(series.primary, series.n_points);
  ExperimentRecord star = record_from(series.star, series.n_points);
  json j = summary_base(config, lambda, n, hash);
  j["replicas"] = face.replicas;
  j["face"] = json{{"successes", face.successes},
                   {"estimate", face.estimate},
                   {"ci", ci_json(face.ci)}};
  j["star"] = json{{"successes", star.successes},
                   {"estimate", star.estimate},
                   {"ci", ci_json(star.ci)}};
  if (timings) j["runtime_ms"] = cell_ms;
  write_text_file(paths.summary, j.dump(2) + "\n");
}

// ---------------------------------------------------------------------
// cycle cells

void run_cycle_cell(const ExperimentConfig& config, double lambda, double n,
                    int workers, const RunOptions& options,
                    const CellPaths& paths, std::uint64_t hash) {
  auto cell_t0 = std::chrono::steady_clock::now();
  Region window = Region::ball(Point::Zero(config.D), n + 2.0 + config.r0);
  std::vector<std::uint8_t> cyc(config.replicas, 0);  // 0, 1, 2 = undetermined
  std::vector<std::uint8_t> face(config.replicas, 0);
  std::vector<std::uint8_t> star(config.replicas, 0);
  std::vector<std::int32_t> n_points(config.replicas, 0);
  std::vector<double> ms;
  if (options.timings) ms.assign(config.replicas, 0.0);

  parallel_blocks(config.replicas, workers,
                  [&](std::uint64_t, std::uint64_t off, std::uint64_t cnt) {
    for (std::uint64_t rep = off; rep < off + cnt; ++rep) {
      auto t0 = std::chrono::steady_clock::now();
      Realization real =
          sample_poisson(window, lambda, config.root_seed, rep);
      CycleCrossing cc = cycle_crossing(real, config.d, n, config.w);
      const bool f = crossing_face(real, config.d, n);
      const bool s = crossing_star(real, config.d, n, config.r0);
      if (cc.verdict == Tri::kOne && !f) {
        containment_violation("cycle without face");
      }
      if (f && !s) containment_violation("face without star");
      cyc[rep] = cc.verdict == Tri::kOne
                     ? 1
                     : (cc.verdict == Tri::kUndetermined ? 2 : 0);
      face[rep] = f ? 1 : 0;
      star[rep] = s ? 1 : 0;
      n_points[rep] = static_cast<std::int32_t>(real.points().size());
      if (options.timings) ms[rep] = elapsed_ms(t0);
    }
  });

  std::vector<std::string> rows(config.replicas);
  std::uint64_t ones = 0, undet = 0;
  for (std::uint64_t rep = 0; rep < config.replicas; ++rep) {
    const char* cfield = cyc[rep] == 1 ? "1" : (cyc[rep] == 2 ? "NA" : "0");
    ones += cyc[rep] == 1;
    undet += cyc[rep] == 2;
    rows[rep] = replica_prefix(config, rep) + "," + cfield + "," +
                std::to_string(face[rep]) + "," + std::to_string(star[rep]) +
                "," + std::to_string(n_points[rep]) + "," +
                ms_field(ms, rep);
  }
  write_text_file(
      paths.csv,
      csv_text("replica,seed,cycle,face,star,n_points,runtime_ms", rows));

  ExperimentRecord frec = record_from(face, n_points);
  ExperimentRecord srec = record_from(star, n_points);
  json j = summary_base(config, lambda, n, hash);
  j["replicas"] = config.replicas;
  json cj = count_json(ones, config.replicas);
  cj["undetermined"] = undet;
  j["cycle"] = cj;
  j["face"] = json{{"successes", frec.successes},
                   {"estimate", frec.estimate},
                   {"ci", ci_json(frec.ci)}};
  j["star"] = json{{"successes", srec.successes},
                   {"estimate", srec.estimate},
                   {"ci", ci_json(srec.ci)}};
  if (options.timings) j["runtime_ms"] = elapsed_ms(cell_t0);
  write_text_file(paths.summary, j.dump(2) + "\n");
}

// ---------------------------------------------------------------------
// delaunay-cycle cells

void run_delaunay_cell(const ExperimentConfig& config, double lambda,
                       double ell, int workers, const RunOptions& options,
                       const CellPaths& paths, std::uint64_t hash) {
  auto cell_t0 = std::chrono::steady_clock::now();
  const int D = config.D;
  // Box of half width 2*ell: covers B_{2 ell}(o) as circumradius_stats
  // asks, with the axis segment well interior.
  Region window =
      Region::box(Point::Zero(D), Point::Constant(D, 2.0 * ell));

  struct Row {
    bool degenerate = false;
    std::int32_t cells = 0, vacant = 0, k0 = 0, k = 0;
    std::int32_t families = 0, cycles = 0, clipped = 0;
    double max_circumradius = 0.0;
    bool axis_far_end_outside = false;
    std::int32_t n_points = 0;
  };
  std::vector<Row> rows(config.replicas);
  std::vector<double> ms;
  if (options.timings) ms.assign(config.replicas, 0.0);

  parallel_blocks(config.replicas, workers,
                  [&](std::uint64_t, std::uint64_t off, std::uint64_t cnt) {
    for (std::uint64_t rep = off; rep < off + cnt; ++rep) {
      auto t0 = std::chrono::steady_clock::now();
      Realization real =
          sample_poisson(window, lambda, config.root_seed, rep);
      Row& row = rows[rep];
      row.n_points = static_cast<std::int32_t>(real.points().size());
      if (row.n_points < D + 1) {
        row.degenerate = true;
        if (options.timings) ms[rep] = elapsed_ms(t0);
        continue;
      }
      DelaunayComplex cx = delaunay(real);
      row.cells = static_cast<std::int32_t>(cx.size());
      std::vector<std::uint8_t> vac = vacancy_flags(cx, real);
      for (std::uint8_t v : vac) row.vacant += v;
      KGrowth growth = grow_K(cx, real, ell);
      row.k0 = static_cast<std::int32_t>(growth.k0.size());
      row.k = static_cast<std::int32_t>(growth.k.size());
      std::vector<CycleFamily> fams = cycle_candidate(cx, real, ell);
      row.families = static_cast<std::int32_t>(fams.size());
      for (const CycleFamily& fam : fams) {
        if (fam.cycle_ok && !fam.clipped) ++row.cycles;
        if (fam.clipped) ++row.clipped;
      }
      row.max_circumradius = circumradius_stats(cx, real, ell).max_radius;
      Point far_end = Point::Zero(D);
      far_end[D - 1] = ell;
      bool inside = false;
      for (std::int32_t cell : growth.k) {
        if (cell_contains(cx, real, static_cast<std::size_t>(cell),
                          far_end)) {
          inside = true;
          break;
        }
      }
      row.axis_far_end_outside = !inside;
      if (options.timings) ms[rep] = elapsed_ms(t0);
    }
  });

  std::vector<std::string> lines(config.replicas);
  std::uint64_t degenerate = 0, with_cycle = 0, axis_out = 0, g_big = 0;
  double family_sum = 0.0, radius_sum = 0.0;
  const double sqrt_ell = std::sqrt(ell);
  for (std::uint64_t rep = 0; rep < config.replicas; ++rep) {
    const Row& row = rows[rep];
    degenerate += row.degenerate;
    with_cycle += row.cycles > 0;
    axis_out += row.axis_far_end_outside;
    g_big += !row.degenerate && row.max_circumradius >= sqrt_ell;
    family_sum += row.families;
    radius_sum += row.max_circumradius;
    lines[rep] = replica_prefix(config, rep) + "," +
                 std::to_string(row.degenerate ? 1 : 0) + "," +
                 std::to_string(row.cells) + "," +
                 std::to_string(row.vacant) + "," + std::to_string(row.k0) +
                 "," + std::to_string(row.k) + "," +
                 std::to_string(row.families) + "," +
                 std::to_string(row.cycles) + "," +
                 std::to_string(row.clipped) + "," +
                 num(row.max_circumradius) + "," +
                 std::to_string(row.axis_far_end_outside ? 1 : 0) + "," +
                 std::to_string(row.n_points) + "," + ms_field(ms, rep);
  }
  write_text_file(
      paths.csv,
      csv_text("replica,seed,degenerate,cells,vacant,k0,k,families,cycles,"
               "clipped,max_circumradius,axis_far_end_outside,n_points,"
               "runtime_ms",
               lines));

  const double m = static_cast<double>(config.replicas);
  json j = summary_base(config, lambda, ell, hash);
  j["replicas"] = config.replicas;
  j["degenerate"] = degenerate;
  j["axis_half_length"] = ell;
  j["cycle_rate"] = count_json(with_cycle, config.replicas);
  j["axis_far_end_outside"] = count_json(axis_out, config.replicas);
  j["circumradius_ge_sqrt_ell"] = count_json(g_big, config.replicas);
  j["mean_families"] = family_sum / m;
  j["mean_max_circumradius"] = radius_sum / m;
  if (options.timings) j["runtime_ms"] = elapsed_ms(cell_t0);
  write_text_file(paths.summary, j.dump(2) + "\n");
}

// ---------------------------------------------------------------------
// osss-audit cells

OsssAuditRun merge_runs(std::vector<OsssAuditRun> parts) {
  if (parts.empty()) throw std::logic_error("runner: no partial runs");
  OsssAuditRun merged = std::move(parts.front());
  for (std::size_t b = 1; b < parts.size(); ++b) {
    OsssAuditRun& part = parts[b];
    if (part.sites.size() != merged.sites.size()) {
      throw std::logic_error("runner: partial site tables differ");
    }
    merged.replicas += part.replicas;
    merged.crossings += part.crossings;
    for (std::size_t i = 0; i < merged.sites.size(); ++i) {
      SiteAccumulator& a = merged.sites[i];
      const SiteAccumulator& p = part.sites[i];
      if (a.site != p.site || a.local_zero != p.local_zero) {
        throw std::logic_error("runner: partial site tables differ");
      }
      a.reveals += p.reveals;
      a.inf_flips += p.inf_flips;
      a.piv_flips += p.piv_flips;
      a.joint_flips += p.joint_flips;
    }
    merged.decisions.insert(merged.decisions.end(), part.decisions.begin(),
                            part.decisions.end());
    merged.n_points.insert(merged.n_points.end(), part.n_points.begin(),
                           part.n_points.end());
  }
  merged.theta_hat = static_cast<double>(merged.crossings) /
                     static_cast<double>(merged.replicas);
  merged.theta_ci = wilson_interval(merged.crossings, merged.replicas);
  return merged;
}

OsssAuditRun blocked_audit(const OsssAuditSpec& spec, int workers) {
  std::vector<OsssAuditRun> parts(block_count(spec.replicas, workers));
  parallel_blocks(spec.replicas, workers,
                  [&](std::uint64_t b, std::uint64_t off, std::uint64_t cnt) {
    OsssAuditSpec block = spec;
    block.replica_offset = spec.replica_offset + off;
    block.replicas = cnt;
    parts[b] = osss_audit_run(block);
  });
  return merge_runs(std::move(parts));
}

double trapezoid(const std::vector<double>& xs,
                 const std::vector<double>& ys) {
  double acc = 0.0;
  for (std::size_t i = 1; i < xs.size(); ++i) {
    acc += 0.5 * (ys[i] + ys[i - 1]) * (xs[i] - xs[i - 1]);
  }
  return acc;
}

void run_osss_cell(const ExperimentConfig& config, double lambda, double r,
                   int workers, const RunOptions& options,
                   const CellPaths& paths, std::uint64_t hash) {
  auto cell_t0 = std::chrono::steady_clock::now();
  std::vector<double> ss =
      config.s_grid.empty() ? std::vector<double>{config.s} : config.s_grid;

  OsssAuditSpec spec;
  spec.D = config.D;
  spec.d = config.d;
  spec.lambda = lambda;
  spec.r = r;
  spec.s = ss.front();
  spec.L = config.L;
  spec.replicas = config.replicas;
  spec.root_seed = config.root_seed;

  // Influence and pivot do not depend on s; one run serves every s value.
  OsssAuditSpec inf_spec = spec;
  inf_spec.run_exploration = false;
  OsssAuditRun inf_run = blocked_audit(inf_spec, workers);

  std::vector<OsssAuditRun> explo_runs;
  for (double s : ss) {
    OsssAuditSpec es = spec;
    es.s = s;
    es.run_influence = false;
    es.run_pivot = false;
    OsssAuditRun run = blocked_audit(es, workers);
    if (run.decisions != inf_run.decisions) {
      throw std::logic_error(
          "runner: exploration and influence replicas disagree");
    }
    explo_runs.push_back(std::move(run));
  }

  std::vector<OsssCheckReport> checks;
  for (const OsssAuditRun& er : explo_runs) {
    OsssAuditRun combined = inf_run;
    for (std::size_t i = 0; i < combined.sites.size(); ++i) {
      combined.sites[i].reveals = er.sites[i].reveals;
    }
    checks.push_back(osss_check(combined));
  }

  std::vector<std::string> rows(config.replicas);
  for (std::uint64_t rep = 0; rep < config.replicas; ++rep) {
    rows[rep] = replica_prefix(config, rep) + "," +
                std::to_string(inf_run.decisions[rep]) + "," +
                std::to_string(inf_run.n_points[rep]) + ",";
  }
  write_text_file(paths.csv,
                  csv_text("replica,seed,decision,n_points,runtime_ms", rows));

  json j = summary_base(config, lambda, r, hash);
  j["replicas"] = inf_run.replicas;
  j["crossings"] = inf_run.crossings;
  j["theta_hat"] = inf_run.theta_hat;
  j["theta_ci"] = ci_json(inf_run.theta_ci);
  j["s_values"] = ss;

  json fixed = json::array();
  for (std::size_t k = 0; k < ss.size(); ++k) {
    fixed.push_back(json{{"s", ss[k]},
                         {"lhs", checks[k].lhs},
                         {"rhs", checks[k].rhs},
                         {"pooled_se", checks[k].pooled_se},
                         {"holds", checks[k].holds}});
  }
  j["osss_fixed_s"] = fixed;

  if (ss.size() >= 2) {
    // Trapezoid average over the s grid of the fixed-s right sides; the
    // per-s errors are correlated, so the averaged SE is conservative.
    std::vector<double> rhs_s, se_s;
    for (const OsssCheckReport& c : checks) {
      rhs_s.push_back(c.rhs);
      se_s.push_back(c.pooled_se);
    }
    const double range = ss.back() - ss.front();
    const double rhs = trapezoid(ss, rhs_s) / range;
    const double se = trapezoid(ss, se_s) / range;
    const double lhs = checks.front().lhs;
    j["osss_integrated"] = json{{"s_lo", ss.front()},
                                {"s_hi", ss.back()},
                                {"lhs", lhs},
                                {"rhs", rhs},
                                {"pooled_se", se},
                                {"holds", lhs <= rhs + 3.0 * se}};
  } else {
    j["osss_integrated"] = nullptr;
  }

  bool inf_bound_all = true;
  json sites = json::array();
  for (std::size_t i = 0; i < inf_run.sites.size(); ++i) {
    const SiteAccumulator& acc = inf_run.sites[i];
    InfluenceBoundReport ib =
        influence_bound_check(acc, inf_run.replicas, lambda);
    inf_bound_all = inf_bound_all && ib.holds;
    json sj;
    sj["site"] = acc.site;
    sj["local_zero"] = acc.local_zero;
    sj["inf"] = count_json(acc.inf_flips, inf_run.replicas);
    sj["piv"] = count_json(acc.piv_flips, inf_run.replicas);
    sj["joint_flips"] = acc.joint_flips;
    sj["influence_bound"] = json{{"coeff", ib.coeff},
                                 {"paired_se", ib.paired_se},
                                 {"holds", ib.holds}};
    json rev = json::array();
    for (std::size_t k = 0; k < ss.size(); ++k) {
      json rj = count_json(explo_runs[k].sites[i].reveals, inf_run.replicas);
      rj["s"] = ss[k];
      rev.push_back(rj);
    }
    sj["revealment"] = rev;
    sites.push_back(sj);
  }
  j["influence_bound_holds_all"] = inf_bound_all;
  j["sites"] = sites;
  if (options.timings) j["runtime_ms"] = elapsed_ms(cell_t0);
  write_text_file(paths.summary, j.dump(2) + "\n");
}

// ---------------------------------------------------------------------
// enhancement cells

void run_enhancement_cell(const ExperimentConfig& config, double lambda,
                          double n, int workers, const RunOptions& options,
                          const CellPaths& paths, std::uint64_t hash) {
  auto cell_t0 = std::chrono::steady_clock::now();
  std::vector<EnhancementRow> parts(block_count(config.replicas, workers));
  parallel_blocks(config.replicas, workers,
                  [&](std::uint64_t b, std::uint64_t off, std::uint64_t cnt) {
    EnhancementSpec es;
    es.D = config.D;
    es.d = config.d;
    es.lambda = lambda;
    es.p = config.p;
    es.delta = config.delta;
    es.r0 = config.r0;
    es.n_grid = {n};
    es.replicas = cnt;
    es.replica_offset = off;
    es.root_seed = config.root_seed;
    parts[b] = enhancement_experiment(es).rows.front();
  });

  EnhancementRow row;
  row.n = n;
  std::uint64_t special_total = 0;
  for (const EnhancementRow& part : parts) {
    row.replicas += part.replicas;
    row.minus_star += part.minus_star;
    row.plus_star += part.plus_star;
    row.minus_face += part.minus_face;
    row.plus_face += part.plus_face;
    special_total += static_cast<std::uint64_t>(std::llround(
        part.mean_special * static_cast<double>(part.replicas)));
    auto append = [](std::vector<std::uint8_t>& dst,
                     const std::vector<std::uint8_t>& src) {
      dst.insert(dst.end(), src.begin(), src.end());
    };
    append(row.minus_star_ind, part.minus_star_ind);
    append(row.plus_star_ind, part.plus_star_ind);
    append(row.minus_face_ind, part.minus_face_ind);
    append(row.plus_face_ind, part.plus_face_ind);
    row.n_points.insert(row.n_points.end(), part.n_points.begin(),
                        part.n_points.end());
  }
  const double m = static_cast<double>(row.replicas);
  row.minus_star_hat = static_cast<double>(row.minus_star) / m;
  row.plus_star_hat = static_cast<double>(row.plus_star) / m;
  row.minus_face_hat = static_cast<double>(row.minus_face) / m;
  row.plus_face_hat = static_cast<double>(row.plus_face) / m;
  row.minus_star_ci = wilson_interval(row.minus_star, row.replicas);
  row.plus_star_ci = wilson_interval(row.plus_star, row.replicas);
  row.mean_special = static_cast<double>(special_total) / m;
  row.minus_exceeds = row.minus_star_hat > row.plus_star_hat;

  std::vector<std::string> rows(config.replicas);
  for (std::uint64_t rep = 0; rep < config.replicas; ++rep) {
    rows[rep] = replica_prefix(config, rep) + "," +
                std::to_string(row.minus_star_ind[rep]) + "," +
                std::to_string(row.plus_star_ind[rep]) + "," +
                std::to_string(row.minus_face_ind[rep]) + "," +
                std::to_string(row.plus_face_ind[rep]) + "," +
                std::to_string(row.n_points[rep]) + ",";
  }
  write_text_file(
      paths.csv,
      csv_text(
          "replica,seed,minus_star,plus_star,minus_face,plus_face,n_points,"
          "runtime_ms",
          rows));

  json j = summary_base(config, lambda, n, hash);
  j["replicas"] = row.replicas;
  j["minus_star"] = count_json(row.minus_star, row.replicas);
  j["plus_star"] = count_json(row.plus_star, row.replicas);
  j["minus_face"] = count_json(row.minus_face, row.replicas);
  j["plus_face"] = count_json(row.plus_face, row.replicas);
  j["mean_special"] = row.mean_special;
  j["minus_exceeds"] = row.minus_exceeds;
  if (options.timings) j["runtime_ms"] = elapsed_ms(cell_t0);
  write_text_file(paths.summary, j.dump(2) + "\n");
}

// ---------------------------------------------------------------------
// orchestration

struct CellPlan {
  double lambda = 0.0;
  double radius = 0.0;
  std::uint64_t hash = 0;
  CellPaths paths;
};

CellPlan plan_cell(const ExperimentConfig& config, double lambda,
                   double radius) {
  CellPlan plan;
  plan.lambda = lambda;
  plan.radius = radius;
  plan.hash = config_cell_hash(config, lambda, radius);
  plan.paths = cell_paths(config, lambda, radius, plan.hash);
  return plan;
}

CellOutcome outcome_of(const CellPlan& plan, bool skipped) {
  CellOutcome out;
  out.lambda = plan.lambda;
  out.radius = plan.radius;
  out.hash = plan.hash;
  out.skipped = skipped;
  out.summary_path = plan.paths.summary;
  out.csv_path = plan.paths.csv;
  return out;
}

// Coupled groups share realizations, so they are recomputed as a unit
// unless every member cell is already complete.
void run_coupled_group(const ExperimentConfig& config,
                       const RunOptions& options, int workers,
                       const std::vector<CellPlan>& plans,
                       RunReport& report) {
  bool all_done = options.resume;
  for (const CellPlan& plan : plans) {
    all_done = all_done && cell_complete(plan.paths, plan.hash);
  }
  if (all_done) {
    for (const CellPlan& plan : plans) {
      report.cells.push_back(outcome_of(plan, true));
    }
    return;
  }

  auto t0 = std::chrono::steady_clock::now();
  std::vector<IndicatorSeries> series;
  if (config.kind == ExperimentKind::kTheta) {
    series = config.coupling == CouplingMode::kLambda
                 ? theta_cells_lambda_coupled(config, plans.front().radius,
                                              workers, options.timings)
                 : theta_cells_radius_coupled(config, plans.front().lambda,
                                              workers, options.timings);
  } else {
    series = config.coupling == CouplingMode::kLambda
                 ? crossing_cells_lambda_coupled(config, plans.front().radius,
                                                 workers, options.timings)
                 : crossing_cells_radius_coupled(config, plans.front().lambda,
                                                 workers, options.timings);
  }
  const double cell_ms = elapsed_ms(t0);
  for (std::size_t k = 0; k < plans.size(); ++k) {
    const CellPlan& plan = plans[k];
    if (config.kind == ExperimentKind::kTheta) {
      write_theta_cell(config, plan.lambda, plan.radius, series[k],
                       plan.paths, plan.hash, options.timings, cell_ms);
    } else {
      write_crossing_cell(config, plan.lambda, plan.radius, series[k],
                          plan.paths, plan.hash, options.timings, cell_ms);
    }
    report.cells.push_back(outcome_of(plan, false));
  }
}

void run_plain_cell(const ExperimentConfig& config, const RunOptions& options,
                    int workers, const CellPlan& plan, RunReport& report) {
  if (options.resume && cell_complete(plan.paths, plan.hash)) {
    report.cells.push_back(outcome_of(plan, true));
    return;
  }
  auto t0 = std::chrono::steady_clock::now();
  switch (config.kind) {
    case ExperimentKind::kTheta: {
      IndicatorSeries series = theta_cell_plain(
          config, plan.lambda, plan.radius, workers, options.timings);
      write_theta_cell(config, plan.lambda, plan.radius, series, plan.paths,
                       plan.hash, options.timings, elapsed_ms(t0));
      break;
    }
    case ExperimentKind::kCrossing: {
      IndicatorSeries series = crossing_cell_plain(
          config, plan.lambda, plan.radius, workers, options.timings);
      write_crossing_cell(config, plan.lambda, plan.radius, series,
                          plan.paths, plan.hash, options.timings,
                          elapsed_ms(t0));
      break;
    }
    case ExperimentKind::kCycle:
      run_cycle_cell(config, plan.lambda, plan.radius, workers, options,
                     plan.paths, plan.hash);
      break;
    case ExperimentKind::kDelaunayCycle:
      run_delaunay_cell(config, plan.lambda, plan.radius, workers, options,
                        plan.paths, plan.hash);
      break;
    case ExperimentKind::kOsssAudit:
      run_osss_cell(config, plan.lambda, plan.radius, workers, options,
                    plan.paths, plan.hash);
      break;
    case ExperimentKind::kEnhancement:
      run_enhancement_cell(config, plan.lambda, plan.radius, workers, options,
                           plan.paths, plan.hash);
      break;
  }
  report.cells.push_back(outcome_of(plan, false));
}

}  // namespace

int resolve_workers(const ExperimentConfig& config,
                    const RunOptions& options) {
  if (options.workers > 0) return options.workers;
  if (const char* env = std::getenv("SIMPERC_WORKERS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v < 1 || v > 4096) {
      throw std::invalid_argument(
          "runner: SIMPERC_WORKERS must be an integer in [1, 4096]");
    }
    return static_cast<int>(v);
  }
  return config.workers;
}

RunReport run_experiment(const ExperimentConfig& config_in,
                         const RunOptions& options) {
  ExperimentConfig config = config_in;
  if (!options.out_dir.empty()) config.out_dir = options.out_dir;
  if (options.seed) config.root_seed = *options.seed;
  const int workers = resolve_workers(config, options);
  config.workers = workers;
  validate_config(config);

  std::error_code ec;
  std::filesystem::create_directories(config.out_dir, ec);
  if (ec) {
    throw std::runtime_error("runner: cannot create output directory '" +
                             config.out_dir + "': " + ec.message());
  }

  RunReport report;
  report.out_dir = config.out_dir;
  report.workers = workers;

  if (config.coupling == CouplingMode::kLambda) {
    for (double radius : config.radius_grid) {
      std::vector<CellPlan> plans;
      for (double lambda : config.lambda_grid) {
        plans.push_back(plan_cell(config, lambda, radius));
      }
      run_coupled_group(config, options, workers, plans, report);
    }
  } else if (config.coupling == CouplingMode::kRadius) {
    for (double lambda : config.lambda_grid) {
      std::vector<CellPlan> plans;
      for (double radius : config.radius_grid) {
        plans.push_back(plan_cell(config, lambda, radius));
      }
      run_coupled_group(config, options, workers, plans, report);
    }
  } else {
    for (double lambda : config.lambda_grid) {
      for (double radius : config.radius_grid) {
        run_plain_cell(config, options, workers,
                       plan_cell(config, lambda, radius), report);
      }
    }
  }
  return report;
}

namespace {

std::string tsv_num(const json& v) {
  return num(v.get<double>(), "%.12g");
}

void plot_row(std::string& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out += '\t';
    out += fields[i];
  }
  out += '\n';
}

std::vector<std::string> cell_params(const json& summary) {
  const json& cfg = summary.at("config");
  const json& cell = summary.at("cell");
  return {std::to_string(cfg.at("D").get<int>()),
          std::to_string(cfg.at("d").get<int>()), tsv_num(cell.at("lambda")),
          tsv_num(cell.at("radius"))};
}

void measure_rows(std::string& out, const std::vector<std::string>& params,
                  const char* name, const json& entry) {
  std::vector<std::string> fields = params;
  fields.push_back(name);
  fields.push_back(tsv_num(entry.at("estimate")));
  if (entry.contains("ci")) {
    fields.push_back(tsv_num(entry.at("ci").at(0)));
    fields.push_back(tsv_num(entry.at("ci").at(1)));
  } else {
    fields.push_back("");
    fields.push_back("");
  }
  plot_row(out, fields);
}

}  // namespace

void emit_plotdata(const std::vector<std::string>& summary_paths,
                   const std::string& out_path) {
  if (summary_paths.empty()) {
    throw std::invalid_argument("plotdata: no summaries given");
  }
  std::vector<json> summaries;
  for (const std::string& path : summary_paths) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("plotdata: cannot read '" + path + "'");
    try {
      summaries.push_back(json::parse(in));
    } catch (const json::parse_error& e) {
      throw std::runtime_error("plotdata: bad summary '" + path +
                               "': " + e.what());
    }
  }
  const std::string kind = summaries.front().at("kind").get<std::string>();
  for (const json& s : summaries) {
    if (s.at("kind").get<std::string>() != kind) {
      throw std::invalid_argument("plotdata: mixed experiment kinds");
    }
  }

  std::string out;
  const bool osss = kind == "osss-audit";
  const bool enh = kind == "enhancement";
  {
    std::vector<std::string> header = {"D", "d", "lambda", "radius"};
    if (osss) header.push_back("s");
    if (enh) {
      header.push_back("p");
      header.push_back("delta");
    }
    header.insert(header.end(), {"measure", "estimate", "ci_lo", "ci_hi"});
    plot_row(out, header);
  }

  for (const json& s : summaries) {
    std::vector<std::string> params = cell_params(s);
    if (kind == "theta") {
      json entry = json{{"estimate", s.at("estimate")}, {"ci", s.at("ci")}};
      measure_rows(out, params, "theta", entry);
    } else if (kind == "crossing") {
      measure_rows(out, params, "face", s.at("face"));
      measure_rows(out, params, "star", s.at("star"));
    } else if (kind == "cycle") {
      measure_rows(out, params, "cycle", s.at("cycle"));
      measure_rows(out, params, "face", s.at("face"));
      measure_rows(out, params, "star", s.at("star"));
    } else if (kind == "delaunay-cycle") {
      measure_rows(out, params, "cycle_rate", s.at("cycle_rate"));
      measure_rows(out, params, "axis_far_end_outside",
                   s.at("axis_far_end_outside"));
      measure_rows(out, params, "circumradius_ge_sqrt_ell",
                   s.at("circumradius_ge_sqrt_ell"));
      measure_rows(out, params, "mean_families",
                   json{{"estimate", s.at("mean_families")}});
      measure_rows(out, params, "mean_max_circumradius",
                   json{{"estimate", s.at("mean_max_circumradius")}});
    } else if (kind == "osss-audit") {
      std::vector<std::string> p = params;
      p.push_back("");
      measure_rows(out, p,
                   "theta", json{{"estimate", s.at("theta_hat")},
                                 {"ci", s.at("theta_ci")}});
      for (const json& check : s.at("osss_fixed_s")) {
        std::vector<std::string> ps = params;
        ps.push_back(tsv_num(check.at("s")));
        measure_rows(out, ps, "osss_lhs",
                     json{{"estimate", check.at("lhs")}});
        measure_rows(out, ps, "osss_rhs",
                     json{{"estimate", check.at("rhs")}});
        const double margin = check.at("rhs").get<double>() +
                              3.0 * check.at("pooled_se").get<double>() -
                              check.at("lhs").get<double>();
        measure_rows(out, ps, "osss_margin",
                     json{{"estimate", margin}});
      }
    } else if (kind == "enhancement") {
      std::vector<std::string> p = params;
      const json& cfg = s.at("config");
      p.push_back(tsv_num(cfg.at("p")));
      p.push_back(tsv_num(cfg.at("delta")));
      measure_rows(out, p, "minus_star", s.at("minus_star"));
      measure_rows(out, p, "plus_star", s.at("plus_star"));
      measure_rows(out, p, "minus_face", s.at("minus_face"));
      measure_rows(out, p, "plus_face", s.at("plus_face"));
      measure_rows(out, p, "mean_special",
                   json{{"estimate", s.at("mean_special")}});
    } else {
      throw std::invalid_argument("plotdata: unknown kind '" + kind + "'");
    }
  }

  if (kind == "theta") {
    // Decay-fit metadata per lambda over its radius grid, as comments.
    std::map<double, std::vector<std::pair<double, double>>> groups;
    for (const json& s : summaries) {
      groups[s.at("cell").at("lambda").get<double>()].push_back(
          {s.at("cell").at("radius").get<double>(),
           s.at("estimate").get<double>()});
    }
    for (auto& [lambda, pts] : groups) {
      if (pts.size() < 2) continue;
      std::sort(pts.begin(), pts.end());
      std::vector<double> rs, thetas;
      for (auto& [r, t] : pts) {
        rs.push_back(r);
        thetas.push_back(t);
      }
      try {
        DecayFit fit = decay_fit(rs, thetas);
        out += "# decay_fit lambda=" + num(lambda, "%.12g") +
               " slope=" + num(fit.slope, "%.12g") +
               " intercept=" + num(fit.intercept, "%.12g") +
               " r2=" + num(fit.r2, "%.12g") +
               " used=" + std::to_string(fit.used) + "\n";
      } catch (const std::invalid_argument&) {
        out += "# decay_fit lambda=" + num(lambda, "%.12g") +
               " skipped: fewer than 2 positive estimates\n";
      }
    }
  }

  write_text_file(out_path, out);
}

}  // namespace simperc
