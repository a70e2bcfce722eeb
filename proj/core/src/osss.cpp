#include "simperc/osss.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <set>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "simperc/geometry.hpp"
#include "simperc/random.hpp"

namespace simperc {

namespace {

constexpr std::int32_t kSiteBias = 32768;

// Packs a site tuple with 16 bits per biased coordinate; unsigned order of
// the packed keys equals lexicographic order of the tuples.
std::uint64_t pack_site(std::span<const std::int32_t> x) {
  std::uint64_t key = 0;
  for (std::int32_t c : x) {
    key = (key << 16) | static_cast<std::uint64_t>(c + kSiteBias);
  }
  return key;
}

void unpack_site(std::uint64_t key, int D, std::int32_t* out) {
  for (int i = D - 1; i >= 0; --i) {
    out[i] = static_cast<std::int32_t>(key & 0xffffULL) - kSiteBias;
    key >>= 16;
  }
}

// Distance from p to the closed unit box site + [-1/2,1/2]^D.
double box_point_distance(std::span<const std::int32_t> site, const Point& p) {
  double s2 = 0.0;
  for (int i = 0; i < static_cast<int>(site.size()); ++i) {
    double t = std::max(std::abs(p[i] - site[i]) - 0.5, 0.0);
    s2 += t * t;
  }
  return std::sqrt(s2);
}

double box_origin_distance(std::span<const std::int32_t> site) {
  double s2 = 0.0;
  for (std::int32_t c : site) {
    double t = std::max(std::abs(static_cast<double>(c)) - 0.5, 0.0);
    s2 += t * t;
  }
  return std::sqrt(s2);
}

// Norm range attained over the closed unit box site + [-1/2,1/2]^D. The norm
// is continuous on the (connected) box, so the attained set is exactly
// [min, max].
std::pair<double, double> box_norm_range(std::span<const std::int32_t> site) {
  double lo2 = 0.0;
  double hi2 = 0.0;
  for (std::int32_t c : site) {
    double a = std::abs(static_cast<double>(c));
    double in = std::max(a - 0.5, 0.0);
    double out = a + 0.5;
    lo2 += in * in;
    hi2 += out * out;
  }
  return {std::sqrt(lo2), std::sqrt(hi2)};
}

// Incremental revealed complex: union-find over discovered simplices with
// per-cluster aggregates (max vertex norm, contains-o, meets the tracking
// sphere) and member vertex lists for eligibility spawning.
class Explorer {
 public:
  Explorer(const Realization& real, const ExplorationSpec& spec)
      : real_(real), spec_(spec), D_(real.dim()) {
    n_ = static_cast<int>(real_.points().size());
    if (n_ + 1 >= (1 << 21)) {
      throw std::invalid_argument("explore: too many points for face keys");
    }
    pts_ = real_.points();
    Point o = Point::Zero(D_);
    pts_.push_back(o);
    pt_revealed_.assign(pts_.size(), 0);
    pt_revealed_[n_] = 1;  // the origin is adjoined, never sampled

    L_ = spec_.L;
    side_ = 2 * L_ + 1;
    std::size_t cells = 1;
    for (int i = 0; i < D_; ++i) cells *= static_cast<std::size_t>(side_);
    site_revealed_.assign(cells, 0);
  }

  ExplorationState run() {
    // Phase 1: every box meeting the annulus {s-1 <= |y| <= s+1}, in
    // lexicographic order. Any simplex with a hull point on the sphere of
    // radius s has all its vertices in the annulus, so the clusters that
    // drive phase 2 are discovered here.
    std::vector<std::int32_t> sites = lattice_sites(D_, L_);
    for (std::size_t off = 0; off < sites.size();
         off += static_cast<std::size_t>(D_)) {
      std::span<const std::int32_t> x(sites.data() + off,
                                      static_cast<std::size_t>(D_));
      auto [lo, hi] = box_norm_range(x);
      if (lo <= spec_.s + 1.0 + kGeomEps && hi >= spec_.s - 1.0 - kGeomEps) {
        reveal(x);
      }
    }
    out_.first_phase = out_.site_order_flat.size() / D_;

    // Phase 2: lowest unrevealed eligible site first. Eligibility spreads
    // from vertices of clusters that meet the tracking sphere.
    std::vector<std::int32_t> x(D_);
    while (!eligible_.empty()) {
      auto it = eligible_.begin();
      std::uint64_t key = *it;
      eligible_.erase(it);
      unpack_site(key, D_, x.data());
      if (site_revealed_[site_index(x)]) continue;
      reveal(x);
    }

    for (std::size_t s = 0; s < parent_.size(); ++s) {
      std::int32_t r = find(static_cast<std::int32_t>(s));
      if (r == static_cast<std::int32_t>(s) && has_o_[r] &&
          max_norm_[r] > spec_.r) {
        out_.decision = true;
        break;
      }
    }
    for (int id = 0; id < n_; ++id) {
      if (pt_revealed_[id]) out_.revealed_points.push_back(id);
    }
    return std::move(out_);
  }

 private:
  std::size_t site_index(std::span<const std::int32_t> x) const {
    std::size_t idx = 0;
    for (int i = 0; i < D_; ++i) {
      idx = idx * static_cast<std::size_t>(side_) +
            static_cast<std::size_t>(x[i] + L_);
    }
    return idx;
  }

  void reveal(std::span<const std::int32_t> x) {
    site_revealed_[site_index(x)] = 1;
    out_.site_order_flat.insert(out_.site_order_flat.end(), x.begin(),
                                x.end());
    Point c(D_);
    for (int i = 0; i < D_; ++i) c[i] = static_cast<double>(x[i]);
    // Superset query by Euclidean radius, then the exact box filter.
    for (int id :
         real_.neighbors_within(c, 0.5 * std::sqrt(double(D_)) + 1e-6)) {
      if (pt_revealed_[id]) continue;
      bool inside = true;
      for (int i = 0; i < D_; ++i) {
        if (std::abs(pts_[id][i] - c[i]) > 0.5 + kGeomEps) {
          inside = false;
          break;
        }
      }
      if (!inside) continue;
      pt_revealed_[id] = 1;
      discover(id);
    }
  }

  // All (d+1)-cliques among revealed points that contain v. Each clique is
  // found exactly once, when its last vertex is revealed.
  void discover(std::int32_t v) {
    nbr_.clear();
    for (int u : real_.neighbors_within(pts_[v], 1.0)) {
      if (u != v && pt_revealed_[u]) nbr_.push_back(u);
    }
    if (pts_[v].norm() <= 1.0 + kGeomEps) nbr_.push_back(n_);
    if (static_cast<int>(nbr_.size()) < spec_.d) return;
    chosen_.clear();
    extend(v);
  }

  void extend(std::int32_t v) {
    if (static_cast<int>(chosen_.size()) == spec_.d) {
      tuple_ = chosen_;
      tuple_.push_back(v);
      std::sort(tuple_.begin(), tuple_.end());
      add_simplex(tuple_);
      return;
    }
    // chosen_ holds indices into nbr_ implicitly via start_; recurse over
    // suffixes so every subset is produced once.
    std::size_t start = chosen_.empty() ? 0 : start_stack_.back();
    for (std::size_t i = start; i < nbr_.size(); ++i) {
      std::int32_t u = nbr_[i];
      bool ok = true;
      for (std::int32_t w : chosen_) {
        if ((pts_[u] - pts_[w]).norm() > 1.0 + kGeomEps) {
          ok = false;
          break;
        }
      }
      if (!ok) continue;
      chosen_.push_back(u);
      start_stack_.push_back(i + 1);
      extend(v);
      start_stack_.pop_back();
      chosen_.pop_back();
    }
  }

  void add_simplex(const std::vector<std::int32_t>& tuple) {
    std::int32_t id = static_cast<std::int32_t>(parent_.size());
    parent_.push_back(id);
    rank_.push_back(0);
    double mx = 0.0;
    double mn = std::numeric_limits<double>::infinity();
    bool o = false;
    for (std::int32_t pid : tuple) {
      double nn = pts_[pid].norm();
      mx = std::max(mx, nn);
      mn = std::min(mn, nn);
      o = o || pid == n_;
    }
    bool touch;
    if (mx < spec_.s - kGeomEps) {
      touch = false;
    } else if (mn <= spec_.s + kGeomEps) {
      touch = true;  // vertices on both sides, hull crosses the sphere
    } else {
      verts_buf_.clear();
      for (std::int32_t pid : tuple) verts_buf_.push_back(pts_[pid]);
      touch = point_simplex_distance(Point::Zero(D_), verts_buf_) <=
              spec_.s + kGeomEps;
    }
    max_norm_.push_back(mx);
    has_o_.push_back(o ? 1 : 0);
    touches_.push_back(touch ? 1 : 0);
    members_.push_back(tuple);
    if (touch) spawn_all(tuple);

    // Unite with every simplex sharing a d-face, through the first
    // representative seen per face.
    for (std::size_t drop = 0; drop < tuple.size(); ++drop) {
      std::uint64_t key = 0;
      for (std::size_t i = 0; i < tuple.size(); ++i) {
        if (i == drop) continue;
        key = (key << 21) | static_cast<std::uint64_t>(tuple[i]);
      }
      auto [it, fresh] = face_rep_.try_emplace(key, id);
      if (!fresh) unite(id, it->second);
    }
  }

  std::int32_t find(std::int32_t a) {
    while (parent_[a] != a) {
      parent_[a] = parent_[parent_[a]];
      a = parent_[a];
    }
    return a;
  }

  void unite(std::int32_t a, std::int32_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (rank_[a] < rank_[b]) std::swap(a, b);
    if (rank_[a] == rank_[b]) ++rank_[a];
    // A cluster that becomes tracked by this merge spawns eligibility for
    // the vertices of its previously untracked part.
    if (touches_[a] && !touches_[b]) spawn_all(members_[b]);
    if (!touches_[a] && touches_[b]) spawn_all(members_[a]);
    parent_[b] = a;
    max_norm_[a] = std::max(max_norm_[a], max_norm_[b]);
    has_o_[a] |= has_o_[b];
    touches_[a] |= touches_[b];
    if (members_[a].size() < members_[b].size()) {
      members_[a].swap(members_[b]);
    }
    members_[a].insert(members_[a].end(), members_[b].begin(),
                       members_[b].end());
    members_[b].clear();
    members_[b].shrink_to_fit();
  }

  void spawn_all(const std::vector<std::int32_t>& vertex_ids) {
    for (std::int32_t pid : vertex_ids) spawn(pid);
  }

  // Makes every unrevealed site of I_L whose box comes within distance 1 of
  // the vertex eligible.
  void spawn(std::int32_t pid) {
    const Point& v = pts_[pid];
    std::int32_t lo[kMaxDim];
    std::int32_t hi[kMaxDim];
    std::int32_t x[kMaxDim];
    for (int i = 0; i < D_; ++i) {
      lo[i] = static_cast<std::int32_t>(std::ceil(v[i] - 1.5 - kGeomEps));
      hi[i] = static_cast<std::int32_t>(std::floor(v[i] + 1.5 + kGeomEps));
      x[i] = lo[i];
    }
    const long long L2 = static_cast<long long>(L_) * L_;
    for (;;) {
      long long n2 = 0;
      for (int i = 0; i < D_; ++i) {
        n2 += static_cast<long long>(x[i]) * x[i];
      }
      if (n2 <= L2) {
        std::span<const std::int32_t> xs(x, static_cast<std::size_t>(D_));
        if (!site_revealed_[site_index(xs)] &&
            box_point_distance(xs, v) <= 1.0 + kGeomEps) {
          eligible_.insert(pack_site(xs));
        }
      }
      int i = D_ - 1;
      while (i >= 0 && x[i] == hi[i]) {
        x[i] = lo[i];
        --i;
      }
      if (i < 0) break;
      ++x[i];
    }
  }

  const Realization& real_;
  ExplorationSpec spec_;
  int D_;
  int n_;
  std::vector<Point> pts_;
  std::vector<std::uint8_t> pt_revealed_;
  int L_ = 0;
  int side_ = 0;
  std::vector<std::uint8_t> site_revealed_;
  std::set<std::uint64_t> eligible_;
  ExplorationState out_;

  std::vector<std::int32_t> parent_;
  std::vector<std::int32_t> rank_;
  std::vector<double> max_norm_;
  std::vector<std::uint8_t> has_o_;
  std::vector<std::uint8_t> touches_;
  std::vector<std::vector<std::int32_t>> members_;
  std::unordered_map<std::uint64_t, std::int32_t> face_rep_;

  std::vector<std::int32_t> nbr_;
  std::vector<std::int32_t> chosen_;
  std::vector<std::size_t> start_stack_;
  std::vector<std::int32_t> tuple_;
  std::vector<Point> verts_buf_;
};

void validate_exploration(const Realization& real,
                          const ExplorationSpec& spec) {
  const int D = real.dim();
  if (D < 1 || D > 3) {
    throw std::invalid_argument("explore: dimension must be 1, 2 or 3");
  }
  if (spec.d < 1 || spec.d > 3) {
    throw std::invalid_argument("explore: d must be in [1, 3]");
  }
  if (!(spec.s >= 1.0)) {
    throw std::invalid_argument("explore: need s >= 1");
  }
  if (!(spec.r >= spec.s)) {
    throw std::invalid_argument("explore: need r >= s");
  }
  // L >= 2r is the contract; L >= r + 2 additionally guarantees that every
  // box a crossing witness can use (vertices of norm <= r + 1) lies in I_L.
  if (!(static_cast<double>(spec.L) >= 2.0 * spec.r) ||
      !(static_cast<double>(spec.L) >= spec.r + 2.0)) {
    throw std::invalid_argument("explore: need L >= 2r");
  }
  // The window must contain every box of I_L, i.e. the cube of half width
  // L+1; its corners decide containment for both region kinds.
  const double c = static_cast<double>(spec.L) + 1.0 - kGeomEps;
  Point corner(D);
  for (unsigned mask = 0; mask < (1u << D); ++mask) {
    for (int i = 0; i < D; ++i) {
      corner[i] = (mask >> i) & 1u ? c : -c;
    }
    if (!real.region().contains(corner)) {
      throw std::invalid_argument(
          "explore: window does not contain the site boxes of I_L");
    }
  }
}

}  // namespace

std::vector<std::int32_t> lattice_sites(int D, int L) {
  if (D < 1 || D > 3 || L < 0) {
    throw std::invalid_argument("lattice_sites: bad dimension or cutoff");
  }
  std::vector<std::int32_t> out;
  std::vector<std::int32_t> x(D, -L);
  const long long L2 = static_cast<long long>(L) * L;
  for (;;) {
    long long n2 = 0;
    for (int i = 0; i < D; ++i) n2 += static_cast<long long>(x[i]) * x[i];
    if (n2 <= L2) out.insert(out.end(), x.begin(), x.end());
    int i = D - 1;
    while (i >= 0 && x[i] == L) {
      x[i] = -L;
      --i;
    }
    if (i < 0) break;
    ++x[i];
  }
  return out;
}

ExplorationState explore(const Realization& real,
                         const ExplorationSpec& spec) {
  validate_exploration(real, spec);
  Explorer e(real, spec);
  return e.run();
}

OsssAuditRun osss_audit_run(const OsssAuditSpec& spec) {
  if (spec.D < 1 || spec.D > 3) {
    throw std::invalid_argument("osss_audit_run: dimension must be 1, 2 or 3");
  }
  if (!(spec.lambda > 0.0)) {
    throw std::invalid_argument("osss_audit_run: need lambda > 0");
  }
  if (spec.replicas == 0) {
    throw std::invalid_argument("osss_audit_run: need replicas >= 1");
  }
  if (!(spec.s >= 1.0 && spec.s <= spec.r)) {
    throw std::invalid_argument("osss_audit_run: need 1 <= s <= r");
  }
  if (spec.run_exploration &&
      !(static_cast<double>(spec.L) >= 2.0 * spec.r)) {
    throw std::invalid_argument("osss_audit_run: need L >= 2r");
  }
  const int D = spec.D;
  std::vector<std::int32_t> sites =
      spec.sites_flat.empty() ? lattice_sites(D, spec.L) : spec.sites_flat;
  if (sites.empty() || sites.size() % static_cast<std::size_t>(D) != 0) {
    throw std::invalid_argument("osss_audit_run: malformed site list");
  }
  const std::size_t nsites = sites.size() / static_cast<std::size_t>(D);

  OsssAuditRun run;
  run.replicas = spec.replicas;
  run.sites.resize(nsites);
  std::unordered_map<std::uint64_t, std::size_t> site_lookup;
  double max_abs = 0.0;
  for (std::size_t i = 0; i < nsites; ++i) {
    std::span<const std::int32_t> x(sites.data() + i * D,
                                    static_cast<std::size_t>(D));
    run.sites[i].site.assign(x.begin(), x.end());
    // Edits confined to a box further than r+1 from the origin cannot
    // change the crossing event: any witness uses vertices of norm at most
    // r+1, so these sites are exact zeros without simulation.
    run.sites[i].local_zero =
        box_origin_distance(x) > spec.r + 1.0 + kGeomEps;
    site_lookup.emplace(pack_site(x), i);
    for (std::int32_t c : x) {
      max_abs = std::max(max_abs, std::abs(static_cast<double>(c)));
    }
  }

  double half = std::max(spec.r + 2.0, max_abs + 1.0);
  if (spec.run_exploration) {
    half = std::max(half, static_cast<double>(spec.L) + 1.0);
  }
  Point hw = Point::Constant(D, half);
  Region window = Region::box(Point::Zero(D), hw);
  ExplorationSpec es;
  es.d = spec.d;
  es.s = spec.s;
  es.r = spec.r;
  es.L = spec.L;

  run.decisions.reserve(spec.replicas);
  run.n_points.reserve(spec.replicas);
  const std::uint64_t rep_end = spec.replica_offset + spec.replicas;
  for (std::uint64_t rep = spec.replica_offset; rep < rep_end; ++rep) {
    Realization real = sample_poisson(window, spec.lambda, spec.root_seed,
                                      rep);
    const bool base = theta_indicator(real, spec.d, spec.r);
    if (base) ++run.crossings;
    run.decisions.push_back(base ? 1 : 0);
    run.n_points.push_back(static_cast<std::int32_t>(real.points().size()));

    if (spec.run_exploration) {
      ExplorationState st = explore(real, es);
      if (st.decision != base) {
        throw std::logic_error(
            "osss_audit_run: exploration decision disagrees with the "
            "direct indicator");
      }
      const std::size_t steps = st.site_order_flat.size() /
                                static_cast<std::size_t>(D);
      for (std::size_t t = 0; t < steps; ++t) {
        std::span<const std::int32_t> x(st.site_order_flat.data() + t * D,
                                        static_cast<std::size_t>(D));
        auto it = site_lookup.find(pack_site(x));
        if (it != site_lookup.end()) ++run.sites[it->second].reveals;
      }
    }

    if (!spec.run_influence && !spec.run_pivot) continue;
    for (std::size_t i = 0; i < nsites; ++i) {
      SiteAccumulator& acc = run.sites[i];
      if (acc.local_zero) continue;
      Point c(D);
      for (int k = 0; k < D; ++k) c[k] = static_cast<double>(acc.site[k]);
      bool inf_flip = false;
      bool piv_flip = false;
      if (spec.run_influence) {
        RngStream edit = derive_stream(spec.root_seed,
                                       StreamTag::kResampleEdit, rep, i);
        Realization edited = resample_in_box(real, c, edit);
        inf_flip = theta_indicator(edited, spec.d, spec.r) != base;
        if (inf_flip) ++acc.inf_flips;
      }
      if (spec.run_pivot && !base) {
        // Insertion is monotone, so a crossing replica can never flip.
        RngStream ins = derive_stream(spec.root_seed, StreamTag::kPivotEdit,
                                      rep, i);
        Point u(D);
        for (int k = 0; k < D; ++k) u[k] = ins.uniform(c[k] - 0.5, c[k] + 0.5);
        Realization edited = add_point(real, u);
        piv_flip = theta_indicator(edited, spec.d, spec.r);
        if (piv_flip) ++acc.piv_flips;
      }
      if (inf_flip && piv_flip) ++acc.joint_flips;
    }
  }

  run.theta_hat = static_cast<double>(run.crossings) /
                  static_cast<double>(run.replicas);
  run.theta_ci = wilson_interval(run.crossings, run.replicas);
  return run;
}

namespace {

OsssAuditSpec single_site_spec(const OsssAuditSpec& spec,
                               std::span<const std::int32_t> site,
                               bool exploration, bool influence, bool pivot) {
  OsssAuditSpec s = spec;
  s.sites_flat.assign(site.begin(), site.end());
  s.run_exploration = exploration;
  s.run_influence = influence;
  s.run_pivot = pivot;
  return s;
}

SiteEstimate from_counts(std::uint64_t hits, std::uint64_t n) {
  SiteEstimate est;
  est.hits = hits;
  est.n = n;
  est.estimate = n ? static_cast<double>(hits) / static_cast<double>(n) : 0.0;
  est.ci = n ? wilson_interval(hits, n) : WilsonInterval{0.0, 0.0};
  return est;
}

}  // namespace

SiteEstimate revealment_estimate(const OsssAuditSpec& spec,
                                 std::span<const std::int32_t> site) {
  OsssAuditRun run =
      osss_audit_run(single_site_spec(spec, site, true, false, false));
  return from_counts(run.sites[0].reveals, run.replicas);
}

SiteEstimate influence_estimate(const OsssAuditSpec& spec,
                                std::span<const std::int32_t> site) {
  if (box_origin_distance(site) > spec.r + 1.0 + kGeomEps) {
    SiteEstimate est = from_counts(0, 0);
    est.local_zero = true;  // exact zero, no replicas consumed
    return est;
  }
  OsssAuditRun run =
      osss_audit_run(single_site_spec(spec, site, false, true, false));
  return from_counts(run.sites[0].inf_flips, run.replicas);
}

SiteEstimate pivot_estimate(const OsssAuditSpec& spec,
                            std::span<const std::int32_t> site) {
  if (box_origin_distance(site) > spec.r + 1.0 + kGeomEps) {
    SiteEstimate est = from_counts(0, 0);
    est.local_zero = true;
    return est;
  }
  OsssAuditRun run =
      osss_audit_run(single_site_spec(spec, site, false, false, true));
  return from_counts(run.sites[0].piv_flips, run.replicas);
}

OsssCheckReport osss_check(const OsssAuditRun& run, double z) {
  OsssCheckReport rep;
  const double m = static_cast<double>(run.replicas);
  const double th = run.theta_hat;
  rep.lhs = th * (1.0 - th);
  const double var_th = th * (1.0 - th) / m;
  double var = (1.0 - 2.0 * th) * (1.0 - 2.0 * th) * var_th;
  for (const SiteAccumulator& s : run.sites) {
    const double delta = static_cast<double>(s.reveals) / m;
    const double inf = static_cast<double>(s.inf_flips) / m;
    rep.rhs += delta * inf;
    const double vd = delta * (1.0 - delta) / m;
    const double vi = inf * (1.0 - inf) / m;
    var += delta * delta * vi + inf * inf * vd + vd * vi;
  }
  rep.pooled_se = std::sqrt(var);
  rep.holds = rep.lhs <= rep.rhs + z * rep.pooled_se;
  return rep;
}

InfluenceBoundReport influence_bound_check(const SiteAccumulator& site,
                                           std::uint64_t replicas,
                                           double lambda, double z) {
  InfluenceBoundReport rep;
  const double m = static_cast<double>(replicas);
  rep.coeff = lambda * std::exp(lambda);
  rep.inf_hat = static_cast<double>(site.inf_flips) / m;
  rep.piv_hat = static_cast<double>(site.piv_flips) / m;
  // Paired per-replica differences d_i = inf_i - coeff * piv_i take one of
  // four values; the joint counts give their exact sample variance.
  const double c = rep.coeff;
  const double n11 = static_cast<double>(site.joint_flips);
  const double n10 = static_cast<double>(site.inf_flips - site.joint_flips);
  const double n01 = static_cast<double>(site.piv_flips - site.joint_flips);
  const double mean = (n10 - c * n01 + (1.0 - c) * n11) / m;
  const double ex2 =
      (n10 + c * c * n01 + (1.0 - c) * (1.0 - c) * n11) / m;
  const double var = std::max(ex2 - mean * mean, 0.0);
  rep.paired_se = std::sqrt(var / m);
  rep.holds = rep.inf_hat <= c * rep.piv_hat + z * rep.paired_se;
  return rep;
}

PoissonRatioBound poisson_ratio_bound(double lambda, int k_max) {
  if (!(lambda > 0.0) || k_max < 1) {
    throw std::invalid_argument("poisson_ratio_bound: bad parameters");
  }
  PoissonRatioBound out;
  out.bound = lambda * std::exp(lambda);
  out.ratios.reserve(static_cast<std::size_t>(k_max));
  const double log_lambda = std::log(lambda);
  for (int k = 1; k <= k_max; ++k) {
    // P(M >= k) / P(M = k-1) = sum_{j>=0} lambda^{j+1} (k-1)!/(k+j)!.
    // Terms and their running sum are carried in log space; the term
    // recurrence is log t_{j+1} = log t_j + log lambda - log(k+j+1).
    double log_term = log_lambda - std::log(static_cast<double>(k));
    double log_sum = log_term;
    for (int j = 0; log_term > log_sum + std::log(1e-18); ++j) {
      log_term += log_lambda - std::log(static_cast<double>(k + j + 1));
      const double hi = std::max(log_sum, log_term);
      log_sum = hi + std::log1p(std::exp(std::min(log_sum, log_term) - hi));
    }
    const double ratio = std::exp(log_sum);
    out.ratios.push_back(ratio);
    out.max_ratio = std::max(out.max_ratio, ratio);
  }
  if (!(out.max_ratio <= out.bound + 1e-12)) {
    throw std::logic_error("poisson_ratio_bound: bound violated");
  }
  return out;
}

}  // namespace simperc
