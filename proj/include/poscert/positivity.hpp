#pragma once

// Positivity of a solution u with |u - u_hat| <= r on the unit square.
//
// The square is split by a dyadic quadtree into boxes where u_hat - r > 0 is
// certified (Omega_+) and the remaining boxes, whose union covers Omega_-.
// Positivity follows when, with m = min u_hat over the cover,
//   1. Omega_+ is nonempty (and not all of Omega),
//   2. u = 0 on the outer boundary (Dirichlet data),
//   3. f >= 0 on [0, 2r + s] for some s > 0,
//   4. f <= 0 on [m - r, 0] and f < 0 on [m - r, 0),
//   5. e = f(x)/x satisfies e([0, -m + r]) < lambda_1(Omega_hat) for a
//      domain Omega_hat containing Omega_-.

#include <array>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "poscert/basis.hpp"
#include "poscert/existence.hpp"
#include "poscert/fem_eig.hpp"
#include "poscert/problem.hpp"
#include "poscert/range.hpp"

namespace poscert {

/// Dyadic box [ix, ix+1] x [iy, iy+1] scaled by 2^-level.
struct DyadicBox {
  int level = 0;
  long ix = 0;
  long iy = 0;

  [[nodiscard]] Box box() const;
  [[nodiscard]] std::array<DyadicBox, 4> children() const;
  friend bool operator==(const DyadicBox&, const DyadicBox&) = default;
};

struct RegionDecomposition {
  std::vector<DyadicBox> omega_plus;
  std::vector<DyadicBox> omega_minus_cover;
  bool touches_outer_boundary = false;
  int max_depth = 0;
};

struct ClassifyOptions {
  int max_depth = 12;
  int threads = 0;  // 0: POSCERT_THREADS or the hardware concurrency
};

int default_threads();

/// Quadtree split of the unit square. A box joins omega_plus when the lower
/// bound of u_hat on it exceeds r2; boxes whose upper bound is <= r2, and
/// straddling boxes at max_depth, go to the cover. Throws OmegaPlusEmpty.
RegionDecomposition classify_regions(const SpectralRange& u, double r2, const ClassifyOptions& opts = {});
RegionDecomposition classify_regions(const SpectralFn& u, double r2, const ClassifyOptions& opts = {});

/// Lower bound of u_hat over the union of the boxes (refined by `depth`
/// bisection levels per box). +inf for an empty cover.
double rigorous_min(const SpectralRange& u, const std::vector<DyadicBox>& cover, int depth = 2, int threads = 0);

/// Boxes tile the unit square: no box contains another and the areas sum to 1.
bool tiles_unit_square(const RegionDecomposition& d);

struct LaneEmdenCheck {
  double threshold = 0;  // upper bound of (max(0, -m + r))^(p-1)
  double lambda1_lower = 0;
  bool pass = false;
};
LaneEmdenCheck check_lane_emden(int p, double m_lower, double r2);

/// Every cover box has interior disjoint from the closed inner square [a, 1-a]^2.
bool cover_inside_frame(const std::vector<DyadicBox>& cover, const FrameDomain& omega_hat);

struct AllenCahnCheck {
  double slack = 0;  // the s in assumption 3
  bool a3 = false;   // 2 r + s <= 1
  bool a4 = false;   // -m + r < 1
  bool a5 = false;   // eps^-2 < lambda_1(Omega_hat)
  double eps_inv_sq_upper = 0;
  double lambda1_hat_lower = 0;
  bool containment = false;
  bool pass = false;
};
/// Throws ContainmentFailure when a cover box escapes Omega_hat.
AllenCahnCheck check_allen_cahn(const Rational& eps, double m_lower, double r2, double lambda1_hat_lower,
                                const RegionDecomposition& d, const FrameDomain& omega_hat);

/// Slack used for assumption 3.
constexpr double kAssumption3Slack = 0x1p-20;

struct Assumption {
  int id = 0;
  bool pass = false;
  std::string evidence;
};

/// Eigenvalue comparison data: lambda_1 of Omega_hat, certified from below.
struct Lambda1Data {
  FrameDomain omega_hat;  // a = 0: the unit square itself
  double lower = 0;
  double upper = 0;
  std::string source;
};

/// 2 pi^2 for the unit square.
Lambda1Data lambda1_unit_square_data();

struct PositivityCertificate {
  ProblemSpec problem;
  std::string u_hash;
  double r2 = 0;
  std::string radius_source = "existence";  // "assumed" when no existence proof backs r2
  RegionDecomposition decomposition;
  double m_lower = 0;
  Lambda1Data lambda1;
  std::optional<LaneEmdenCheck> lane_emden;
  std::optional<AllenCahnCheck> allen_cahn;
  std::vector<Assumption> assumptions;
  bool verdict = false;
};

struct CertifyOptions {
  ClassifyOptions classify;
  int min_refine = 2;
};

/// Runs all five checks. Sub-operation failures give a false verdict with
/// the failing assumption named. Throws VerificationFailure when the
/// existence certificate does not re-check or belongs to another u_hat.
PositivityCertificate certify(const ProblemSpec& problem, const SpectralFn& u, const ExistenceCertificate& existence,
                              const Lambda1Data& lambda1, const CertifyOptions& opts = {});

/// The positivity checks for a given L-infinity radius r2, without an
/// existence proof behind it.
PositivityCertificate assess(const ProblemSpec& problem, const SpectralFn& u, double r2, const Lambda1Data& lambda1,
                             const CertifyOptions& opts = {});

/// Re-verifies every stored box and inequality against u_hat.
bool recheck(const PositivityCertificate& cert, const SpectralFn& u, int min_refine = 2);

nlohmann::json to_json(const PositivityCertificate& cert, bool include_boxes = true);
PositivityCertificate positivity_from_json(const nlohmann::json& j);

}  // namespace poscert
