#pragma once

// Identity verifier: a registry of residual checks over submersion fixtures,
// a deterministic sampling driver and a serializable report.

#include <cstdint>
#include <optional>
#include <random>

#include "fsub/zoo.hpp"

namespace finsub {

enum class SampleKind { kAny, kHorizontal, kVertical };
enum class ToleranceClass { kExact, kStandard, kLoose };
enum class Corruption { kNone, kBaseRescale, kFlipASign, kDropQtildeTerm };

std::string corruption_name(Corruption c);
Corruption corruption_from_name(const std::string& s);

class VerifyCtx;

struct IdentityCheck {
  std::string id;
  std::string note;  // plain-language statement of what the residual measures
  SampleKind kind = SampleKind::kAny;
  ToleranceClass cls = ToleranceClass::kStandard;
  bool diagnostic = false;  // reported only, never gates the suite
  int min_fiber_dim = 1;
  bool needs_totally_geodesic = false;
  bool needs_horizontally_regular = false;
  int max_samples = 0;  // 0 = run at every sample
  std::function<std::optional<double>(VerifyCtx&)> residual;
};

const std::vector<IdentityCheck>& identity_catalogue();

struct IdentityStats {
  std::string id;
  std::string note;
  std::string cls;
  double tolerance = 0.0;
  bool diagnostic = false;
  bool applicable = true;
  int count = 0;
  int skipped = 0;
  double max = 0.0;
  double mean = 0.0;
  std::vector<double> worst_x, worst_v;
  bool pass = true;
};

struct SuiteOptions {
  int n_samples = 100;
  uint64_t seed = 0;
  ToleranceProfile profile = ToleranceProfile::ad();
  std::vector<std::string> identity_filter;  // empty = full catalogue
  int jobs = 1;
  Corruption corruption = Corruption::kNone;
  std::string per_sample_csv;  // when set, residuals are dumped per sample
};

struct VerificationReport {
  std::string schema = "fsub-report/1";
  std::string fixture;
  uint64_t seed = 0;
  int n_samples = 0;
  std::string profile;
  std::string corruption = "none";
  int rejected_samples = 0;
  int degenerate_rejections = 0;
  std::vector<IdentityStats> identities;
  int64_t wall_time_ms = 0;  // excluded from the serialized form by default

  bool all_passed() const;
  // Deterministic serialization: fixed key order, shortest-round-trip floats.
  // Timing is only emitted on request because byte-identical reports for
  // identical configurations are part of the contract.
  std::string to_json(bool include_timing = false) const;
  static VerificationReport from_json(const std::string& text);
};

// Definition-level gate: differential rank, fiber nondegeneracy and
// horizontal length preservation at sampled sites.  Throws FixtureInvalid
// naming the failed invariant.
void validate_fixture(const Fixture& f, int samples, uint64_t seed);

VerificationReport run_suite(const Fixture& f, const SuiteOptions& opts);

// Per-sample evaluation context handed to the identity residuals.
class VerifyCtx {
 public:
  VerifyCtx(const Fixture& f, Corruption corruption, Vec x, Vec v);

  const Fixture& fixture() const { return *f_; }
  SubJets& sj() { return sj_; }
  ChartJets& tot() { return sj_.total(); }
  const Vec& x() const { return sj_.x0(); }
  const Vec& v() const { return sj_.v0(); }
  Corruption corruption() const { return corruption_; }

  void reseed(uint64_t stream);
  double uniform(double lo, double hi);
  Vec rand_vec(double scale = 1.0);
  Vec rand_vertical(double scale = 1.0);
  Vec rand_ghorizontal(double scale = 1.0);

  // Corruption-aware tensor access used by every identity.
  Vec ta(TAKind kind, const Vec& b, const Vec& e);
  Vec nabla_ta(TAKind kind, const Vec& e, const Vec& h, const Vec& b);
  Vec qhat(const Vec& u, const Vec& w);
  Vec qtilde(const Vec& x, const Vec& y);
  Vec nabla_qtilde(const Vec& e, const Vec& h, const Vec& b);
  Vec dot_qtilde(const Vec& h, const Vec& b, const Vec& dir);

  double gv(const Vec& a, const Vec& b);
  Vec top(const Vec& e) { return sj_.top_value(e); }
  Vec bot(const Vec& e) { return sj_.bot_value(e); }
  Vec csharp(const Vec& a, const Vec& b);
  double flag_denominator(const Vec& w);

 private:
  const Fixture* f_;
  Corruption corruption_;
  SubJets sj_;
  std::mt19937_64 rng_;
};

// Normalized residuals: |difference| / (1 + max term magnitude).
double norm_residual(double diff, std::initializer_list<double> terms);
double norm_residual(const Vec& diff, std::initializer_list<Vec> terms);

}  // namespace finsub
