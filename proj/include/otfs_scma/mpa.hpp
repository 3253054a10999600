#pragma once

#include <functional>
#include <vector>

#include "otfs_scma/common.hpp"

namespace otfs {

// Bipartite graph between scalar observations y_d and vector-valued
// variables x_c. An edge (d, c) carries the 1 x dv coefficient slice h_dc so
// that y_d = sum_c h_dc x_c + noise.
struct EffectiveFactorGraph {
    struct Edge {
        int observation = 0;
        int variable = 0;
        std::vector<cplx> coefficients;
    };

    int observation_count = 0;
    int variable_count = 0;
    int coefficient_length = 0;  // dv

    std::vector<Edge> edges;
    std::vector<std::vector<int>> observation_edges;  // M_d, as edge ids
    std::vector<std::vector<int>> variable_edges;     // N_c, as edge ids

    EffectiveFactorGraph() = default;
    EffectiveFactorGraph(int observations, int variables, int dv);

    void add_edge(int observation, int variable, std::vector<cplx> coefficients);

    int observation_degree(int d) const { return static_cast<int>(observation_edges[static_cast<std::size_t>(d)].size()); }
    int variable_degree(int c) const { return static_cast<int>(variable_edges[static_cast<std::size_t>(c)].size()); }
    int max_observation_degree() const;
    double mean_observation_degree() const;
    double mean_variable_degree() const;
};

struct DetectorConfig {
    int max_iter = 10;
    double convergence_tol = 1e-6;
    // Weight of the new variable-to-observation message; 1 disables damping.
    double damping = 1.0;
    // Largest observation degree the exact marginalization will enumerate.
    int enumeration_cap = 12;

    void validate() const;
};

// A variable's alphabet: A candidate vectors of length dv.
using Alphabet = std::vector<std::vector<cplx>>;

struct VariableAlphabets {
    std::vector<Alphabet> alphabets;
    std::vector<int> of_variable;  // alphabet index per variable

    const Alphabet& operator[](int c) const {
        return alphabets[static_cast<std::size_t>(of_variable[static_cast<std::size_t>(c)])];
    }
};

// Messages and posteriors between iterations. Stored as normalized
// log-probabilities; the accessors return linear probabilities.
class MpaState {
public:
    MpaState(const EffectiveFactorGraph& graph, const VariableAlphabets& alphabets);

    int iteration() const { return iteration_; }
    std::size_t edge_count() const { return offsets_.size() - 1; }
    int variable_count() const { return static_cast<int>(posterior_offsets_.size()) - 1; }

    std::vector<double> to_variable(int edge) const;     // U_{d->c}
    std::vector<double> to_observation(int edge) const;  // V_{c->d}
    std::vector<double> posterior(int variable) const;   // V_c

private:
    friend class MpaEngine;

    static std::vector<double> exp_span(const std::vector<double>& logs, std::size_t begin, std::size_t end);

    int iteration_ = 0;
    std::vector<std::size_t> offsets_;            // per edge, into the message arrays
    std::vector<std::size_t> posterior_offsets_;  // per variable
    std::vector<double> log_u_;
    std::vector<double> log_v_;
    std::vector<double> log_post_;
};

struct MpaResult {
    std::vector<int> decisions;  // argmax posterior per variable, lowest index on ties
    std::vector<std::vector<double>> posteriors;
    int iterations = 0;
    bool converged = false;
};

using MpaObserver = std::function<void(const MpaState&)>;

// Sum-product message passing over `graph`, exact marginalization at the
// observation nodes. Gaussian likelihood exp(-|y_d - sum h x|^2 / N0).
// Throws ComplexityError if an observation node exceeds cfg.enumeration_cap.
MpaResult run_mpa(const EffectiveFactorGraph& graph, const VariableAlphabets& alphabets, const CVector& y,
                  double N0, const DetectorConfig& cfg, const MpaObserver& observer = {});

}  // namespace otfs
