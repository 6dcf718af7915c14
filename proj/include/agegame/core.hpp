#pragma once

// Parameters, topologies, subscription profiles and the closed-form age
// primitives shared by the simulator, the analytic solvers and the
// equilibrium search.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace agegame {

/// Raised for any invalid parameter, topology or profile.
class ConfigError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Slotted system parameters: event probability, server sampling probability,
/// per-edge gossip probability and the age-tolerance multiplier.
class SystemParams {
public:
  SystemParams(double p_e, double beta, double p, double L)
      : p_e_(p_e), beta_(beta), p_(p), L_(L) {
    check_probability("p_e", p_e);
    check_probability("beta", beta);
    check_probability("p", p);
    if (!(L >= 1.0) || !std::isfinite(L)) {
      throw ConfigError("L must be a finite real >= 1, got " + std::to_string(L));
    }
  }

  double p_e() const { return p_e_; }
  double beta() const { return beta_; }
  double p() const { return p_; }
  double L() const { return L_; }

  SystemParams with_beta(double beta) const { return {p_e_, beta, p_, L_}; }

private:
  static void check_probability(const char* name, double v) {
    if (!(v > 0.0 && v <= 1.0)) {
      throw ConfigError(std::string(name) + " must lie in (0,1], got " + std::to_string(v));
    }
  }

  double p_e_;
  double beta_;
  double p_;
  double L_;
};

// ---------------------------------------------------------------------------
// Extended rates

/// Why a threshold is +inf.
enum class InfiniteReason {
  /// The closed form has a nonpositive denominator: the bound holds for every
  /// beta, i.e. it never binds.
  NonpositiveDenominator,
};

/// A rate in (0, +inf]. Finite values above 1 are legal and mean "would need
/// beta > 1"; +inf carries a reason.
class ExtendedRate {
public:
  static ExtendedRate finite(double v) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw std::domain_error("finite ExtendedRate must be strictly positive");
    }
    return ExtendedRate(v, std::nullopt);
  }
  static ExtendedRate infinite(InfiniteReason why) {
    return ExtendedRate(std::numeric_limits<double>::infinity(), why);
  }
  /// 1 / denominator, mapping denominator <= 0 to +inf.
  static ExtendedRate reciprocal(double denominator) {
    if (!(denominator > 0.0)) return infinite(InfiniteReason::NonpositiveDenominator);
    return finite(1.0 / denominator);
  }

  bool is_finite() const { return !reason_.has_value(); }
  /// Finite and a valid probability.
  bool in_unit_interval() const { return is_finite() && value_ <= 1.0; }
  double value() const { return value_; }
  std::optional<InfiniteReason> reason() const { return reason_; }

  friend bool operator==(const ExtendedRate&, const ExtendedRate&) = default;

private:
  ExtendedRate(double v, std::optional<InfiniteReason> r) : value_(v), reason_(r) {}
  double value_;
  std::optional<InfiniteReason> reason_;
};

/// True iff beta >= rate (false when rate is +inf).
inline bool reached(double beta, const ExtendedRate& rate) {
  return rate.is_finite() && beta >= rate.value();
}

inline std::string reason_token(const ExtendedRate& rate) {
  if (rate.is_finite()) return rate.in_unit_interval() ? "" : "exceeds_one";
  return "nonpositive_denominator";
}

// ---------------------------------------------------------------------------
// Topology

struct LineTag {};
struct TreeTag {
  int r = 2;
  /// Number of levels; level 0 is the root.
  int depth = 1;
};
struct StarTag {
  int r = 1;
};
struct GeneralTag {};

using TopologyClass = std::variant<LineTag, TreeTag, StarTag, GeneralTag>;

using Edge = std::pair<int, int>;

/// Directed gossip graph. (i, j) means i can send to j. Tagged topologies are
/// validated against their structural definition.
class Topology {
public:
  Topology(int n, std::vector<Edge> edges, TopologyClass tag = GeneralTag{})
      : n_(n), edges_(std::move(edges)), tag_(tag) {
    if (n <= 0) throw ConfigError("topology needs at least one node");
    std::set<Edge> seen;
    for (auto [i, j] : edges_) {
      if (i < 0 || i >= n || j < 0 || j >= n) {
        throw ConfigError("edge (" + std::to_string(i) + "," + std::to_string(j) +
                          ") out of range");
      }
      if (i == j) throw ConfigError("self-loop at node " + std::to_string(i));
      if (!seen.insert({i, j}).second) {
        throw ConfigError("duplicate edge (" + std::to_string(i) + "," + std::to_string(j) + ")");
      }
    }
    in_.assign(n, {});
    for (auto [i, j] : edges_) in_[j].push_back(i);
    for (auto& v : in_) std::sort(v.begin(), v.end());
    validate_tag(seen);
  }

  static Topology line(int n) {
    std::vector<Edge> e;
    for (int k = 0; k + 1 < n; ++k) e.emplace_back(k, k + 1);
    return Topology(n, std::move(e), LineTag{});
  }

  /// Complete r-ary out-tree with `depth` levels, breadth-first numbering.
  static Topology tree(int r, int depth) {
    if (r < 2) throw ConfigError("tree branching factor r must be >= 2");
    if (depth < 1) throw ConfigError("tree depth must be >= 1");
    std::int64_t n = 0;
    std::int64_t width = 1;
    for (int d = 0; d < depth; ++d) {
      n += width;
      width *= r;
      if (n > 50'000'000) throw ConfigError("tree too large");
    }
    std::vector<Edge> e;
    for (std::int64_t child = 1; child < n; ++child) {
      e.emplace_back(static_cast<int>((child - 1) / r), static_cast<int>(child));
    }
    return Topology(static_cast<int>(n), std::move(e), TreeTag{r, depth});
  }

  /// Node 0 is the center, 1..r are spokes; every spoke edge is bidirectional.
  static Topology star(int r) {
    if (r < 1) throw ConfigError("star needs r >= 1");
    std::vector<Edge> e;
    for (int j = 1; j <= r; ++j) {
      e.emplace_back(0, j);
      e.emplace_back(j, 0);
    }
    return Topology(r + 1, std::move(e), StarTag{r});
  }

  int size() const { return n_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const TopologyClass& tag() const { return tag_; }
  /// Sorted in-neighbors of node j.
  const std::vector<int>& in_neighbors(int j) const { return in_.at(j); }

  bool is_line() const { return std::holds_alternative<LineTag>(tag_); }
  bool is_tree() const { return std::holds_alternative<TreeTag>(tag_); }
  bool is_star() const { return std::holds_alternative<StarTag>(tag_); }

  /// Level of node i in a tree (0 for the root).
  int tree_level(int i) const {
    const auto& t = std::get<TreeTag>(tag_);
    int level = 0;
    std::int64_t first = 0;
    std::int64_t width = 1;
    while (i >= first + width) {
      first += width;
      width *= t.r;
      ++level;
    }
    return level;
  }

private:
  void validate_tag(const std::set<Edge>& seen) const {
    auto mismatch = [](const std::string& what) {
      throw ConfigError("edge list does not match " + what + " tag");
    };
    if (std::holds_alternative<LineTag>(tag_)) {
      if (static_cast<int>(edges_.size()) != n_ - 1) mismatch("line");
      for (int k = 0; k + 1 < n_; ++k)
        if (!seen.count({k, k + 1})) mismatch("line");
    } else if (const auto* t = std::get_if<TreeTag>(&tag_)) {
      if (t->r < 2 || t->depth < 1) mismatch("tree");
      if (static_cast<int>(edges_.size()) != n_ - 1) mismatch("tree");
      std::int64_t expect = 0;
      std::int64_t width = 1;
      for (int d = 0; d < t->depth; ++d, width *= t->r) expect += width;
      if (expect != n_) mismatch("tree");
      for (int c = 1; c < n_; ++c)
        if (!seen.count({(c - 1) / t->r, c})) mismatch("tree");
    } else if (const auto* s = std::get_if<StarTag>(&tag_)) {
      if (n_ != s->r + 1 || static_cast<int>(edges_.size()) != 2 * s->r) mismatch("star");
      for (int j = 1; j <= s->r; ++j)
        if (!seen.count({0, j}) || !seen.count({j, 0})) mismatch("star");
    }
  }

  int n_;
  std::vector<Edge> edges_;
  TopologyClass tag_;
  std::vector<std::vector<int>> in_;
};

// ---------------------------------------------------------------------------
// Subscription profiles

/// Binary action vector: actions[i] == true means node i subscribes.
class SubscriptionProfile {
public:
  SubscriptionProfile() = default;
  explicit SubscriptionProfile(std::vector<bool> actions) : a_(std::move(actions)) {}
  SubscriptionProfile(std::initializer_list<bool> actions) : a_(actions) {}
  SubscriptionProfile(std::size_t n, bool value) : a_(n, value) {}

  static SubscriptionProfile for_topology(const Topology& t, std::vector<bool> actions) {
    if (actions.size() != static_cast<std::size_t>(t.size())) {
      throw ConfigError("profile length " + std::to_string(actions.size()) +
                        " does not match node count " + std::to_string(t.size()));
    }
    return SubscriptionProfile(std::move(actions));
  }

  /// Profile whose bits are the binary digits of `code`, node 0 most significant.
  static SubscriptionProfile from_code(std::size_t n, std::uint64_t code) {
    std::vector<bool> a(n);
    for (std::size_t i = 0; i < n; ++i) a[i] = (code >> (n - 1 - i)) & 1u;
    return SubscriptionProfile(std::move(a));
  }

  std::size_t size() const { return a_.size(); }
  bool subscribes(std::size_t i) const { return a_.at(i); }
  const std::vector<bool>& actions() const { return a_; }

  std::size_t subscriber_count() const {
    return static_cast<std::size_t>(std::count(a_.begin(), a_.end(), true));
  }
  double subscription_fraction() const {
    return a_.empty() ? 0.0 : static_cast<double>(subscriber_count()) / static_cast<double>(a_.size());
  }

  SubscriptionProfile flipped(std::size_t i) const {
    auto b = a_;
    b.at(i) = !b.at(i);
    return SubscriptionProfile(std::move(b));
  }

  std::string to_string() const {
    std::string s;
    s.reserve(a_.size());
    for (bool b : a_) s.push_back(b ? '1' : '0');
    return s;
  }

  friend bool operator==(const SubscriptionProfile&, const SubscriptionProfile&) = default;
  friend bool operator<(const SubscriptionProfile& x, const SubscriptionProfile& y) {
    return x.a_ < y.a_;
  }

private:
  std::vector<bool> a_;
};

inline void require_matching(const Topology& t, const SubscriptionProfile& a) {
  if (a.size() != static_cast<std::size_t>(t.size())) {
    throw ConfigError("profile length " + std::to_string(a.size()) +
                      " does not match node count " + std::to_string(t.size()));
  }
}

// ---------------------------------------------------------------------------
// Closed-form ages (units: versions)

/// Long-run mean age at the server.
inline double server_age(const SystemParams& s) { return s.p_e() / s.beta(); }

/// Long-run mean age at a direct subscriber: one slot behind the server.
inline double subscriber_age(const SystemParams& s) { return server_age(s) + s.p_e(); }

/// A non-subscriber's mean age must stay strictly below this bound.
inline double ac_threshold(const SystemParams& s) { return s.L() * subscriber_age(s); }

}  // namespace agegame
