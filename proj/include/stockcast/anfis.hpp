#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <variant>
#include <vector>

#include "stockcast/dataio.hpp"
#include "stockcast/linalg.hpp"

namespace stockcast::anfis {

/// exp(-1/2 ((x - center) / sigma)^2)
struct Gaussian {
    double center = 0.0;
    double sigma = 1.0;
};

/// Piecewise linear: 0 outside [left, right], 1 at `peak`.
struct Triangular {
    double left = 0.0;
    double peak = 0.5;
    double right = 1.0;
};

using MembershipFn = std::variant<Gaussian, Triangular>;

enum class MfKind { gaussian, triangular };

MfKind kind_of(const MembershipFn& mf);
std::size_t parameter_count(const MembershipFn& mf);
void validate(const MembershipFn& mf);

double mf_eval(const MembershipFn& mf, double x);

/// Membership grade and its partials with respect to the MF parameters in
/// declaration order (center, sigma) or (left, peak, right).
struct MfGrade {
    double value = 0.0;
    std::array<double, 3> d{};
};

MfGrade mf_eval_grad(const MembershipFn& mf, double x);

/// Rule strengths below this are floored when an input is covered by no rule.
inline constexpr double kStrengthFloor = 1e-12;

/// First-order Takagi-Sugeno system over a full grid of premise terms.
///
/// Rule r combines one membership function per input; rules enumerate the
/// Cartesian product with the last input varying fastest. Rule r's output is
/// f_r = p_r . x + q_r, stored as row r of `consequents` = [p_r, q_r].
struct AnfisModel {
    std::size_t input_dim = 0;
    std::vector<std::vector<MembershipFn>> mfs; // per input
    Matrix consequents;                         // rules x (input_dim + 1)

    std::size_t rule_count() const;
    std::vector<std::size_t> rule_terms(std::size_t rule) const;

    std::size_t premise_parameter_count() const;
    Vector premise_parameters() const;
    void set_premise_parameters(const Vector& params);

    std::size_t consequent_parameter_count() const { return rule_count() * (input_dim + 1); }
    Vector consequent_vector() const;
    void set_consequent_vector(const Vector& x);
};

struct InputRange {
    double min = 0.0;
    double max = 1.0;
};

/// Evenly spaced peaks over each input range; triangle feet sit on the
/// neighbouring peaks (one spacing beyond the range for the outer terms),
/// gaussian widths are half the spacing. Consequents start at zero.
AnfisModel build_grid_rules(std::size_t d, std::size_t mfs_per_input,
                            std::span<const InputRange> input_ranges,
                            MfKind kind = MfKind::triangular);

std::vector<InputRange> input_ranges(const SupervisedDataset& data);

struct ForwardPass {
    double output = 0.0;
    Vector strengths;  // product of the premise grades per rule
    Vector normalized; // strengths / sum(strengths)
    bool floored = false;
};

ForwardPass anfis_forward(const AnfisModel& model, std::span<const double> x);
ForwardPass anfis_forward(const AnfisModel& model, const Vector& x);

Vector anfis_predict(const AnfisModel& model, const Matrix& x);

/// Sum of squared output errors.
double anfis_sse(const AnfisModel& model, const SupervisedDataset& data);

/// Row of the consequent design matrix: per rule, normalized strength times
/// (x, 1).
Vector design_row(const AnfisModel& model, std::span<const double> x);

struct BatchLse {};
struct SequentialLse {
    double gamma = linalg::kDefaultRlsGamma;
};
using LseMode = std::variant<BatchLse, SequentialLse>;

struct LseOutcome {
    AnfisModel model;
    bool underdetermined = false; // more consequent parameters than rows
};

/// Least-squares identification of all consequents with the premises held
/// fixed. Batch mode solves the stacked system; sequential mode runs the
/// recursive estimator over the rows with no forgetting.
LseOutcome anfis_consequent_lse(AnfisModel model, const SupervisedDataset& data,
                                const LseMode& mode = BatchLse{});

/// dE/d(premise parameters) for E = sum (output - t)^2, in the order of
/// `AnfisModel::premise_parameters`.
Vector anfis_premise_gradient(const AnfisModel& model, const SupervisedDataset& data);

struct EpochResult {
    AnfisModel model;
    double error = 0.0; // E after the least-squares pass
};

/// Forward pass (batch LSE of the consequents), then one gradient step of
/// size `eta` on the premise parameters. Widths are clamped positive and
/// triangle vertices re-sorted after the step.
EpochResult anfis_hybrid_epoch(AnfisModel model, const SupervisedDataset& data, double eta);

struct AnfisTrainConfig {
    std::size_t mfs_per_input = 3;
    MfKind kind = MfKind::triangular;
    std::size_t epochs = 12;
    double eta = 0.01;
};

struct AnfisTrainResult {
    AnfisModel model;
    std::vector<double> epoch_errors;
};

/// Grid initialization from the training ranges, `epochs` hybrid epochs and
/// a closing LSE pass. Returns the lowest-error model seen.
AnfisTrainResult anfis_train(const SupervisedDataset& data, const AnfisTrainConfig& config = {});

/// Online consequent estimation with forgetting factor `lambda`. Premises
/// stay fixed.
struct AnfisOnlineState {
    AnfisModel model;
    linalg::RlsState rls;
    double lambda = 1.0;
};

AnfisOnlineState anfis_online_init(AnfisModel model, double lambda,
                                   double gamma = linalg::kDefaultRlsGamma);

void anfis_online_update(AnfisOnlineState& state, std::span<const double> x, double t);

} // namespace stockcast::anfis
