#ifndef NETEVO_ESTIMATION_HPP
#define NETEVO_ESTIMATION_HPP

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "netevo/events.hpp"
#include "netevo/likelihood.hpp"
#include "netevo/model.hpp"

namespace netevo {

/// Controls one fitting run. Candidate families are instantiated per grid
/// point: the Pfp family sweeps delta over [delta_lo, delta_hi] in steps of
/// delta_step, the Recent family sweeps the window list; everything else
/// has no parameter.
struct FitConfig {
    enum class Role { NewNode, Internal };

    std::vector<ComponentKind> candidate_components = {
        ComponentKind::Null, ComponentKind::Degree, ComponentKind::Singleton,
        ComponentKind::Recent, ComponentKind::Pfp};
    double delta_lo = -0.5;
    double delta_hi = 0.5;
    double delta_step = 0.005;
    std::vector<std::uint32_t> windows = {1, 3, 5};
    unsigned em_max_iters = 200;
    double em_tol = 1e-9;
    Role role = Role::NewNode;
    /// Mixture terms with weight below this are dropped from the returned
    /// spec and the remainder refitted.
    double prune_threshold = 1e-3;
    unsigned threads = 1;

    void validate() const;
};

/// FitConfig plus which roles a config file asked for.
struct FitFileConfig {
    FitConfig config;
    bool fit_new_node = true;
    bool fit_internal = true;
};

/// Parses a key=value fit config file. Recognized keys: candidates, delta,
/// windows, em_max_iters, em_tol, role, prune, threads.
FitFileConfig load_fit_config(std::istream& in);
FitFileConfig load_fit_config_file(const std::string& path);

/// Per-choice-step probabilities of every candidate component, cached by
/// replaying the stream once. Row j = the j-th choice of the requested
/// role; q(j, i) is the probability pure component i assigns to the
/// observed choice, 0 when the component's support is empty there (the
/// empty flag distinguishes that case from a merely unlikely choice).
struct StepProbCache {
    std::vector<Component> components;
    std::size_t steps = 0;
    std::vector<double> q;            // steps x components, row-major
    std::vector<char> empty_support;  // steps x components
    std::vector<double> q_null;       // per step

    double at(std::size_t step, std::size_t comp) const {
        return q[step * components.size() + comp];
    }
    bool empty_at(std::size_t step, std::size_t comp) const {
        return empty_support[step * components.size() + comp] != 0;
    }
};

StepProbCache per_step_component_probs(std::span<const Component> components,
                                       const Graph& g0,
                                       std::span<const EdgeEvent> events,
                                       FitConfig::Role role);

/// Result of the EM weight fit over a cached probability matrix.
struct WeightsFit {
    std::vector<double> betas;   // on the simplex
    std::vector<double> trace;   // mixture log-likelihood per iteration
    unsigned iterations = 0;
    bool converged = false;
    /// Candidate pairs with identical probability columns; any split of
    /// their combined weight is equally likely, so the returned betas are
    /// one optimum among many.
    std::vector<std::pair<std::size_t, std::size_t>> degenerate_pairs;
};

/// Maximum-likelihood mixture weights by EM on the simplex:
///   beta_i <- (1/t) * sum_j beta_i q_ij / sum_k beta_k q_kj
/// starting from uniform weights. The objective is nondecreasing across
/// iterations. Throws AllZeroStepsError if some step has q = 0 for every
/// candidate.
WeightsFit fit_weights(const StepProbCache& cache, const FitConfig& config);

struct FitResult {
    ModelSpec spec;
    LikelihoodReport report;     // fitted spec in its role, null in the other
    std::vector<double> trace;   // EM trace of the winning grid point
    FitConfig::Role role = FitConfig::Role::NewNode;
    double role_c0 = 0.0;        // the maximized objective
    bool degenerate = false;
};

/// Grid-searches the nonlinear parameters, fits mixture weights by EM at
/// every grid point, and returns the spec maximizing the role-restricted
/// per-choice likelihood ratio. Ties go to the spec with fewer components,
/// then smaller AIC. Deterministic given the config.
FitResult fit_model(const Graph& g0, std::span<const EdgeEvent> events,
                    const FitConfig& config);

}  // namespace netevo

#endif  // NETEVO_ESTIMATION_HPP
