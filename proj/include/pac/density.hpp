#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "pac/causal_graph.hpp"
#include "pac/dataset.hpp"
#include "pac/random.hpp"

namespace pac {

enum class HeadKind { Gaussian, Bernoulli };

inline constexpr double kSigmaFloor = 1e-3;
inline constexpr double kLogitClamp = 15.0;

/// Fully connected layer, weights stored row-major (outputs x inputs).
struct DenseLayer {
    std::size_t inputs = 0;
    std::size_t outputs = 0;
    std::vector<double> weights;
    std::vector<double> bias;

    double& w(std::size_t out, std::size_t in) { return weights[out * inputs + in]; }
    double w(std::size_t out, std::size_t in) const { return weights[out * inputs + in]; }
};

/// Layers applied in order with tanh between them; the last layer is linear
/// and feeds the distribution head.
struct MlpParams {
    std::vector<DenseLayer> layers;

    std::size_t parameter_count() const;
    std::vector<double> flatten() const;
    void assign(std::span<const double> flat);
};

struct Standardization {
    std::vector<double> mean;
    std::vector<double> scale;
};

struct GaussianParams {
    double mu = 0.0;
    double sigma = 1.0;
};

struct BernoulliParams {
    double p = 0.5;
    double logit = 0.0;  // after clamping
};

using DistributionParams = std::variant<GaussianParams, BernoulliParams>;

/// One learned conditional distribution P(node | parents).
///
/// Root nodes have no parents and read the constant input 1.0.
struct Mechanism {
    std::string node;
    std::vector<std::string> parents;
    HeadKind head = HeadKind::Gaussian;
    Standardization standardization;
    MlpParams params;

    std::size_t input_dim() const { return parents.empty() ? 1 : parents.size(); }
};

inline HeadKind head_for(const VariableKind& kind) {
    return is_binary(kind) ? HeadKind::Bernoulli : HeadKind::Gaussian;
}

/// Builds a mechanism with weights uniform in +-1/sqrt(fan_in) and identity
/// standardization.
Mechanism make_mechanism(std::string node, std::vector<std::string> parents, HeadKind head,
                         std::span<const std::size_t> hidden, std::uint64_t seed);

/// Raw parent values in mechanism parent order ([1.0] for roots).
DistributionParams forward(const Mechanism& mech, std::span<const double> parent_values);

double sample_from(const DistributionParams& params, Rng& rng);
double sample(const Mechanism& mech, std::span<const double> parent_values, Rng& rng);

/// Row-major (parents, value) pairs in raw units.
struct TrainingSet {
    std::size_t input_dim = 1;
    std::vector<double> inputs;
    std::vector<double> targets;

    std::size_t size() const noexcept { return targets.size(); }
    std::span<const double> row(std::size_t i) const { return {inputs.data() + i * input_dim, input_dim}; }
};

TrainingSet make_training_set(const Dataset& data, const std::string& node, const std::vector<std::string>& parents);

/// Mean negative log-likelihood of the batch.
double negative_log_likelihood(const Mechanism& mech, const TrainingSet& batch);

struct GradientResult {
    double loss = 0.0;
    MlpParams gradient;  // same shapes as mech.params
};

/// Reverse-mode gradient of the mean NLL over the given rows (all rows if empty).
GradientResult gradients(const Mechanism& mech, const TrainingSet& batch, std::span<const std::size_t> rows = {});

struct TrainConfig {
    double learning_rate = 0.01;
    double rms_decay = 0.9;
    double rms_epsilon = 1e-8;
    std::size_t epochs = 300;
    std::size_t batch_size = 128;
    std::uint64_t seed = 0;
    std::vector<std::size_t> hidden{16, 16};

    void validate() const;
};

struct FitReport {
    double initial_nll = 0.0;
    double final_nll = 0.0;
    std::vector<double> epoch_nll;  // full-set NLL after each epoch
    std::size_t best_epoch = 0;     // 0 = initial parameters
};

inline constexpr std::size_t kMinTrainingRows = 100;

/// RMSProp minibatch training. Returns the parameters with the lowest
/// full-set NLL seen (initial parameters included), so the final NLL never
/// exceeds the initial one.
Mechanism fit(const Dataset& data, const Node& node, const std::vector<std::string>& parents,
              const TrainConfig& config, FitReport* report = nullptr);

}  // namespace pac
