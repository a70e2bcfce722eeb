#include "simperc/enhancement.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <utility>
#include <vector>

#include "simperc/geometry.hpp"
#include "simperc/random.hpp"

namespace simperc {

namespace {

constexpr double kWitnessRadius = 0.125;  // 1/8
constexpr double kCenterRange = 0.875;    // 7/8, so B_{1/8}(y) fits in B_1(x)
constexpr double kSeparation = 1.25;      // 5/4, so the balls are > 1 apart

void require_r0(double r0) {
  if (!(r0 > 2.0)) {
    throw std::invalid_argument(
        "special points: need r0 > 2 (enhancement hypothesis)");
  }
}

// Candidate witness constraints, shared by detection and verification.
bool witness_geometry_ok(const Point& x, const Point& y, const Point& z) {
  const double dy = (y - x).norm();
  const double dz = (z - x).norm();
  if (dy > kCenterRange + kGeomEps || dz > kCenterRange + kGeomEps) {
    return false;
  }
  // x outside both witness balls keeps the membership counts at exactly d.
  if (dy <= kWitnessRadius + kGeomEps || dz <= kWitnessRadius + kGeomEps) {
    return false;
  }
  return (y - z).norm() > kSeparation + kGeomEps;
}

// Subsets of {0, ..., m-1} of size d that contain index 0; the complement
// of such a subset is the other group, so each split is produced once.
void splits_of(int m, int d, std::vector<std::vector<int>>& out) {
  std::vector<int> pick = {0};
  // iterative stack of next candidate per level
  std::vector<int> next = {1};
  while (!next.empty()) {
    if (static_cast<int>(pick.size()) == d) {
      out.push_back(pick);
      pick.pop_back();
      next.pop_back();
      if (!next.empty()) ++next.back();
      continue;
    }
    if (next.back() >= m) {
      pick.pop_back();
      next.pop_back();
      if (!next.empty()) ++next.back();
      continue;
    }
    pick.push_back(next.back());
    next.push_back(next.back() + 1);
  }
}

struct SplitCandidate {
  SpecialPointReport report;
  bool ok = false;
};

SplitCandidate try_split(const Realization& real, int x_id,
                         const std::vector<int>& others,
                         const std::vector<int>& pick) {
  SplitCandidate cand;
  const auto& pts = real.points();
  std::vector<int> group_y;
  std::vector<int> group_z;
  std::vector<std::uint8_t> in_y(others.size(), 0);
  for (int idx : pick) in_y[idx] = 1;
  std::vector<Point> vy;
  std::vector<Point> vz;
  for (std::size_t i = 0; i < others.size(); ++i) {
    if (in_y[i]) {
      group_y.push_back(others[i]);
      vy.push_back(pts[others[i]]);
    } else {
      group_z.push_back(others[i]);
      vz.push_back(pts[others[i]]);
    }
  }
  Ball by = min_enclosing_ball(vy);
  Ball bz = min_enclosing_ball(vz);
  if (by.radius > kWitnessRadius + kGeomEps ||
      bz.radius > kWitnessRadius + kGeomEps) {
    return cand;
  }
  if (!witness_geometry_ok(pts[x_id], by.center, bz.center)) return cand;
  cand.ok = true;
  cand.report.point_id = x_id;
  cand.report.y_center = by.center;
  cand.report.z_center = bz.center;
  cand.report.group_y = std::move(group_y);
  cand.report.group_z = std::move(group_z);
  cand.report.meb_radius_y = by.radius;
  cand.report.meb_radius_z = bz.radius;
  cand.report.dist_y = (by.center - pts[x_id]).norm();
  cand.report.dist_z = (bz.center - pts[x_id]).norm();
  cand.report.separation = (by.center - bz.center).norm();
  return cand;
}

// Special flags for every point, reusing the detector.
std::vector<std::uint8_t> special_flags(const Realization& real, double r0,
                                        int d) {
  std::vector<std::uint8_t> flags(real.points().size(), 0);
  for (const SpecialPointReport& rep : detect_special(real, r0, d)) {
    flags[rep.point_id] = 1;
  }
  return flags;
}

bool star_indicator(const std::vector<Point>& pts, int d, double n,
                    double r0) {
  GridIndex grid(pts);
  return crossing_star(pts, grid, d, n, r0);
}

bool face_indicator(const std::vector<Point>& pts, int d, double n) {
  GridIndex grid(pts);
  return crossing_face(pts, grid, d, n);
}

}  // namespace

std::vector<SpecialPointReport> detect_special(const Realization& real,
                                               double r0, int d) {
  require_r0(r0);
  if (d < 1) throw std::invalid_argument("detect_special: need d >= 1");
  std::vector<SpecialPointReport> out;
  const auto& pts = real.points();
  std::vector<std::vector<int>> picks;
  for (int x_id = 0; x_id < static_cast<int>(pts.size()); ++x_id) {
    std::vector<int> others = real.neighbors_within(pts[x_id], r0);
    others.erase(std::remove(others.begin(), others.end(), x_id),
                 others.end());
    // The witness balls live inside B_1(x) and the rest of B_{r0}(x) must
    // be empty, so exactly 2d companions is a hard requirement.
    if (static_cast<int>(others.size()) != 2 * d) continue;
    picks.clear();
    splits_of(2 * d, d, picks);
    for (const std::vector<int>& pick : picks) {
      SplitCandidate cand = try_split(real, x_id, others, pick);
      if (!cand.ok) continue;
      if (!verify_special_report(real, r0, d, cand.report)) {
        throw std::logic_error(
            "detect_special: report failed raw re-verification");
      }
      out.push_back(std::move(cand.report));
      break;
    }
  }
  return out;
}

bool verify_special_report(const Realization& real, double r0, int d,
                           const SpecialPointReport& rep) {
  require_r0(r0);
  const auto& pts = real.points();
  if (rep.point_id < 0 || rep.point_id >= static_cast<int>(pts.size())) {
    return false;
  }
  if (static_cast<int>(rep.group_y.size()) != d ||
      static_cast<int>(rep.group_z.size()) != d) {
    return false;
  }
  const Point& x = pts[rep.point_id];
  if (!witness_geometry_ok(x, rep.y_center, rep.z_center)) return false;
  // Exact membership: the witness balls contain their group and nothing
  // else; the r0-ball contains only x and the two groups.
  std::vector<int> in_y;
  std::vector<int> in_z;
  std::vector<int> in_r0;
  for (int id = 0; id < static_cast<int>(pts.size()); ++id) {
    if ((pts[id] - rep.y_center).norm() <= kWitnessRadius + kGeomEps) {
      in_y.push_back(id);
    }
    if ((pts[id] - rep.z_center).norm() <= kWitnessRadius + kGeomEps) {
      in_z.push_back(id);
    }
    if (id != rep.point_id && (pts[id] - x).norm() <= r0 + kGeomEps) {
      in_r0.push_back(id);
    }
  }
  std::vector<int> gy = rep.group_y;
  std::vector<int> gz = rep.group_z;
  std::sort(gy.begin(), gy.end());
  std::sort(gz.begin(), gz.end());
  if (in_y != gy || in_z != gz) return false;
  std::vector<int> both = gy;
  both.insert(both.end(), gz.begin(), gz.end());
  std::sort(both.begin(), both.end());
  if (std::adjacent_find(both.begin(), both.end()) != both.end()) {
    return false;
  }
  return in_r0 == both;
}

std::vector<SpecialPointReport> detect_special_refined(const Realization& real,
                                                       double r0, int d,
                                                       double step) {
  require_r0(r0);
  if (d < 1 || !(step > 0.0)) {
    throw std::invalid_argument("detect_special_refined: bad parameters");
  }
  const auto& pts = real.points();
  const int D = real.dim();
  std::vector<SpecialPointReport> out;
  for (int x_id = 0; x_id < static_cast<int>(pts.size()); ++x_id) {
    std::vector<int> others = real.neighbors_within(pts[x_id], r0);
    others.erase(std::remove(others.begin(), others.end(), x_id),
                 others.end());
    if (static_cast<int>(others.size()) != 2 * d) continue;
    const Point& x = pts[x_id];

    // Lattice centers y with |y-x| in (1/8, 7/8] and exactly d of the
    // companions inside B_{1/8}(y), grouped by which companions those are.
    std::map<std::vector<int>, std::vector<Point>> centers_by_group;
    const int span = static_cast<int>(std::floor(kCenterRange / step)) + 1;
    std::vector<int> idx(D, -span);
    for (;;) {
      Point y(D);
      for (int i = 0; i < D; ++i) y[i] = x[i] + idx[i] * step;
      const double dxy = (y - x).norm();
      if (dxy <= kCenterRange + kGeomEps && dxy > kWitnessRadius + kGeomEps) {
        std::vector<int> group;
        for (int id : others) {
          if ((pts[id] - y).norm() <= kWitnessRadius + kGeomEps) {
            group.push_back(id);
          }
        }
        if (static_cast<int>(group.size()) == d) {
          centers_by_group[group].push_back(y);
        }
      }
      int i = D - 1;
      while (i >= 0 && idx[i] == span) {
        idx[i] = -span;
        --i;
      }
      if (i < 0) break;
      ++idx[i];
    }

    bool found = false;
    for (auto ay = centers_by_group.begin();
         !found && ay != centers_by_group.end(); ++ay) {
      for (auto az = std::next(ay); !found && az != centers_by_group.end();
           ++az) {
        // Complementary groups cover all companions.
        std::vector<int> merged = ay->first;
        merged.insert(merged.end(), az->first.begin(), az->first.end());
        std::sort(merged.begin(), merged.end());
        std::vector<int> sorted_others = others;
        std::sort(sorted_others.begin(), sorted_others.end());
        if (merged != sorted_others) continue;
        double best = 0.0;
        Point by;
        Point bz;
        for (const Point& y : ay->second) {
          for (const Point& z : az->second) {
            const double sep = (y - z).norm();
            if (sep > best) {
              best = sep;
              by = y;
              bz = z;
            }
          }
        }
        if (best <= kSeparation + kGeomEps) continue;
        SpecialPointReport rep;
        rep.point_id = x_id;
        rep.y_center = by;
        rep.z_center = bz;
        rep.group_y = ay->first;
        rep.group_z = az->first;
        std::vector<Point> vy;
        for (int id : rep.group_y) vy.push_back(pts[id]);
        std::vector<Point> vz;
        for (int id : rep.group_z) vz.push_back(pts[id]);
        rep.meb_radius_y = min_enclosing_ball(vy).radius;
        rep.meb_radius_z = min_enclosing_ball(vz).radius;
        rep.dist_y = (by - x).norm();
        rep.dist_z = (bz - x).norm();
        rep.separation = best;
        if (verify_special_report(real, r0, d, rep)) {
          out.push_back(std::move(rep));
          found = true;
        }
      }
    }
  }
  return out;
}

ThinnedSet gamma_thin(const MarkedRealization& marked, double r0, int d) {
  const std::size_t n = marked.base.points().size();
  if (marked.xi1.size() != n || marked.xi2.size() != n) {
    throw std::invalid_argument("gamma_thin: marks not aligned with points");
  }
  std::vector<std::uint8_t> special = special_flags(marked.base, r0, d);
  ThinnedSet thin;
  for (std::size_t i = 0; i < n; ++i) {
    if (special[i]) thin.special.push_back(static_cast<int>(i));
    const bool survives =
        special[i] ? (marked.xi1[i] && marked.xi2[i]) : (marked.xi1[i] != 0);
    if (survives) thin.survivors.push_back(static_cast<int>(i));
  }
  return thin;
}

namespace {

void validate_thin_spec(const ThinSpec& spec) {
  if (!(spec.lambda > 0.0)) {
    throw std::invalid_argument("thinned estimate: need lambda > 0");
  }
  if (!(spec.p >= 0.0 && spec.p <= 1.0 && spec.q >= 0.0 && spec.q <= 1.0)) {
    throw std::invalid_argument("thinned estimate: p, q must lie in [0,1]");
  }
  if (!(spec.n > 2.0)) {
    throw std::invalid_argument("thinned estimate: need n > 2");
  }
  require_r0(spec.r0);
  if (spec.replicas == 0) {
    throw std::invalid_argument("thinned estimate: need replicas >= 1");
  }
}

ExperimentRecord thin_estimate(const ThinSpec& spec, bool star) {
  validate_thin_spec(spec);
  Region window =
      Region::ball(Point::Zero(spec.D), spec.n + 2.0 + spec.r0);
  ExperimentRecord rec;
  rec.replicas = spec.replicas;
  rec.indicators.reserve(spec.replicas);
  rec.n_points.reserve(spec.replicas);
  for (std::uint64_t rep = 0; rep < spec.replicas; ++rep) {
    Realization real =
        sample_poisson(window, spec.lambda, spec.root_seed, rep);
    MarkedRealization marked =
        sample_marks(real, spec.p, spec.q, spec.root_seed, rep);
    ThinnedSet thin = gamma_thin(marked, spec.r0, spec.d);
    std::vector<Point> pts;
    pts.reserve(thin.survivors.size());
    for (int id : thin.survivors) pts.push_back(real.points()[id]);
    const bool ind = star ? star_indicator(pts, spec.d, spec.n, spec.r0)
                          : face_indicator(pts, spec.d, spec.n);
    rec.indicators.push_back(ind ? 1 : 0);
    rec.n_points.push_back(static_cast<std::int32_t>(pts.size()));
    if (ind) ++rec.successes;
  }
  rec.estimate = static_cast<double>(rec.successes) /
                 static_cast<double>(rec.replicas);
  rec.ci = wilson_interval(rec.successes, rec.replicas);
  return rec;
}

}  // namespace

ExperimentRecord theta_face_thin(const ThinSpec& spec) {
  return thin_estimate(spec, false);
}

ExperimentRecord theta_star_thin(const ThinSpec& spec) {
  return thin_estimate(spec, true);
}

PivOutcome piv_events(const MarkedRealization& marked, const Point& x, int j,
                      double ell, double n, double r0, int d,
                      bool other_mark_at_x) {
  if (j != 1 && j != 2) {
    throw std::invalid_argument("piv_events: j must be 1 or 2");
  }
  if (ell < 0.0 || !(n > 2.0)) {
    throw std::invalid_argument("piv_events: need ell >= 0 and n > 2");
  }
  require_r0(r0);
  const std::size_t m = marked.base.points().size();
  if (marked.xi1.size() != m || marked.xi2.size() != m) {
    throw std::invalid_argument("piv_events: marks not aligned with points");
  }
  if (!marked.base.region().contains(x)) {
    throw std::invalid_argument("piv_events: x outside the window");
  }

  std::vector<Point> pts = marked.base.points();
  pts.push_back(x);
  const int x_id = static_cast<int>(m);
  Realization joined(pts, marked.base.region(), marked.base.intensity(),
                     marked.base.seed());
  std::vector<std::uint8_t> xi1 = marked.xi1;
  std::vector<std::uint8_t> xi2 = marked.xi2;
  xi1.push_back(j == 2 ? other_mark_at_x : 0);
  xi2.push_back(j == 1 ? other_mark_at_x : 0);
  if (ell > 0.0) {
    // Force the second mark field to 1 on B_{ell+r0}(x), sparing x itself.
    for (int id : joined.neighbors_within(x, ell + r0)) {
      if (id != x_id) xi2[id] = 1;
    }
  }

  std::vector<std::uint8_t> special = special_flags(joined, r0, d);
  auto evaluate = [&](std::uint8_t value) {
    if (j == 1) {
      xi1[x_id] = value;
    } else {
      xi2[x_id] = value;
    }
    std::vector<Point> surv;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const bool keep = special[i] ? (xi1[i] && xi2[i]) : (xi1[i] != 0);
      if (keep) surv.push_back(pts[i]);
    }
    return star_indicator(surv, d, n, r0);
  };

  PivOutcome out;
  out.with_one = evaluate(1);
  out.with_zero = evaluate(0);
  out.pivotal = out.with_one != out.with_zero;
  return out;
}

EnhancementReport enhancement_experiment(const EnhancementSpec& spec) {
  if (!(spec.p - spec.delta > 0.0 && spec.p + spec.delta < 1.0)) {
    throw std::invalid_argument(
        "enhancement_experiment: need 0 < p - delta and p + delta < 1");
  }
  if (!(spec.lambda > 0.0) || spec.replicas == 0 || spec.n_grid.empty()) {
    throw std::invalid_argument("enhancement_experiment: bad parameters");
  }
  require_r0(spec.r0);
  for (double n : spec.n_grid) {
    if (!(n > 2.0)) {
      throw std::invalid_argument("enhancement_experiment: need n > 2");
    }
  }

  EnhancementReport report;
  for (double n : spec.n_grid) {
    EnhancementRow row;
    row.n = n;
    row.replicas = spec.replicas;
    Region window = Region::ball(Point::Zero(spec.D), n + 2.0 + spec.r0);
    std::uint64_t special_total = 0;
    const std::uint64_t rep_end = spec.replica_offset + spec.replicas;
    for (std::uint64_t rep = spec.replica_offset; rep < rep_end; ++rep) {
      Realization real =
          sample_poisson(window, spec.lambda, spec.root_seed, rep);
      MarkUniforms u = sample_mark_uniforms(real, spec.root_seed, rep);
      std::vector<std::uint8_t> special =
          special_flags(real, spec.r0, spec.d);
      for (std::uint8_t f : special) special_total += f;
      row.n_points.push_back(static_cast<std::int32_t>(real.points().size()));

      auto side = [&](double p, double q, std::uint64_t& star_count,
                      std::uint64_t& face_count,
                      std::vector<std::uint8_t>& star_ind,
                      std::vector<std::uint8_t>& face_ind) {
        MarkedRealization marked = marks_from_uniforms(real, u, p, q);
        std::vector<Point> surv;
        for (std::size_t i = 0; i < special.size(); ++i) {
          const bool keep = special[i] ? (marked.xi1[i] && marked.xi2[i])
                                       : (marked.xi1[i] != 0);
          if (keep) surv.push_back(real.points()[i]);
        }
        const bool star = star_indicator(surv, spec.d, n, spec.r0);
        const bool face = face_indicator(surv, spec.d, n);
        if (star) ++star_count;
        if (face) ++face_count;
        star_ind.push_back(star ? 1 : 0);
        face_ind.push_back(face ? 1 : 0);
      };
      side(spec.p - spec.delta, 0.5, row.minus_star, row.minus_face,
           row.minus_star_ind, row.minus_face_ind);
      side(spec.p + spec.delta, 0.25, row.plus_star, row.plus_face,
           row.plus_star_ind, row.plus_face_ind);
    }
    const double m = static_cast<double>(spec.replicas);
    row.minus_star_hat = static_cast<double>(row.minus_star) / m;
    row.plus_star_hat = static_cast<double>(row.plus_star) / m;
    row.minus_face_hat = static_cast<double>(row.minus_face) / m;
    row.plus_face_hat = static_cast<double>(row.plus_face) / m;
    row.minus_star_ci = wilson_interval(row.minus_star, spec.replicas);
    row.plus_star_ci = wilson_interval(row.plus_star, spec.replicas);
    row.mean_special = static_cast<double>(special_total) / m;
    row.minus_exceeds = row.minus_star_hat > row.plus_star_hat;
    report.rows.push_back(row);
  }
  return report;
}

}  // namespace simperc
