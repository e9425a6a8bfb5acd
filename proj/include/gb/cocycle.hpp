#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gb/types.hpp"

namespace gb {

/// Linear cocycle sampled over a finite base with a time-h shift. For a
/// periodic base the shift wraps; for a single-point base arbitrary powers
/// are available through fast exponentiation.
class SampledCocycle {
public:
    SampledCocycle(std::vector<Mat> maps, double step, bool periodic)
        : maps_(std::move(maps)), step_(step), periodic_(periodic) {}

    std::size_t size() const { return maps_.size(); }
    int fiber_dim() const { return static_cast<int>(maps_.front().rows()); }
    double step() const { return step_; }
    bool periodic() const { return periodic_; }
    const Mat& map(std::size_t i) const { return maps_[i]; }

    /// Product of k shift maps starting at base index `from` (k < 0 walks
    /// backward through inverses). Non-periodic chains clamp at their ends.
    Mat transfer(std::size_t from, long k) const;

    /// Largest number of forward (and backward) steps available from `from`.
    long max_steps(std::size_t from, bool forward) const;

    std::vector<double> condition_numbers() const;

private:
    std::vector<Mat> maps_;
    double step_;
    bool periodic_;
};

enum class QhVerdict { QuasiHyperbolic, Not, Indeterminate };

struct VectorWitness {
    std::size_t base = 0;
    Vec direction;
    double max_norm = 0.0;
};

struct CocycleReport {
    QhVerdict quasi_hyperbolic = QhVerdict::Indeterminate;
    std::optional<VectorWitness> bounded_witness;
    std::vector<VectorWitness> indeterminate_witnesses;
    double K33 = 0.0;       // empirical constant of the two-point bound
    double K33_half = 0.0;  // same constant measured at half the horizon
    std::vector<std::pair<int, int>> dims;  // per base point: (dim Es, dim Eu)
    bool es_eu_intersect = false;           // E^s and E^u share a direction
    std::string growth_type;                // "exponential", "linear" or "none"
    double growth_rate = 0.0;
    double horizon = 0.0;
    double threshold = 0.0;
};

struct QhOptions {
    int mesh = 360;          // fiber directions tested per base point
    double bounded_margin = 0.0;  // 0 -> sqrt(threshold)
    std::uint64_t seed = 12345;   // direction sampling for fiber_dim > 2
};

/// Certify growth of every unit fiber vector within [-horizon, horizon]:
/// quasi-hyperbolic when each tested vector exceeds `threshold` somewhere;
/// vectors that stay below the bounded margin witness failure, and the band
/// between is reported indeterminate. E^s/E^u are estimated through the
/// norm-at-horizon proxy for boundedness.
CocycleReport quasi_hyperbolicity_check(const SampledCocycle& cocycle, double horizon,
                                        double threshold, const QhOptions& opt = {});

struct DimsAt {
    int es = 0;
    int eu = 0;
};

struct SackerSellInput {
    int fiber_dim = 0;
    DimsAt at_x;
    std::vector<DimsAt> alpha_points;  // dims at sampled alpha-limit points
    std::vector<DimsAt> omega_points;  // dims at sampled omega-limit points
    std::vector<std::vector<int>> minimal_set_es_dims;  // per minimal set
};

/// Dimension inequalities relating a point to its limit sets, plus the
/// constancy precondition on minimal sets. Pure arithmetic on dimensions.
bool sacker_sell_dims(const SackerSellInput& input);

struct ExponentialFit {
    bool decaying = false;
    double C = 0.0;
    double lambda = 0.0;    // norm(t) <= C exp(-lambda t) when decaying
    double residual = 0.0;  // rms residual of the log fit
    double growth_rate = 0.0;  // reported instead when the data grows
};

/// Least-squares fit of log(norm) against t.
ExponentialFit exponential_fit(const std::vector<std::pair<double, double>>& norm_vs_t);

}  // namespace gb
