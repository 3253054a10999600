#include "otfs_scma/mpa.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace otfs {

namespace {

constexpr double kNoiseFloor = 1e-12;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Normalizes log-probabilities in place so they exponentiate to a distribution.
void normalize_logs(double* logs, std::size_t n) {
    double mx = kNegInf;
    for (std::size_t i = 0; i < n; ++i) mx = std::max(mx, logs[i]);
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += std::exp(logs[i] - mx);
    const double lse = mx + std::log(s);
    for (std::size_t i = 0; i < n; ++i) logs[i] -= lse;
}

// Streaming log-sum-exp accumulator.
struct LogAcc {
    double mx = kNegInf;
    double sum = 0.0;

    void add(double x) {
        if (x <= mx) {
            sum += std::exp(x - mx);
        } else {
            sum = sum * std::exp(mx - x) + 1.0;
            mx = x;
        }
    }
    double value() const { return mx + std::log(sum); }
};

}  // namespace

// ============================================================================
// EffectiveFactorGraph
// ============================================================================

EffectiveFactorGraph::EffectiveFactorGraph(int observations, int variables, int dv)
    : observation_count(observations),
      variable_count(variables),
      coefficient_length(dv),
      observation_edges(static_cast<std::size_t>(observations)),
      variable_edges(static_cast<std::size_t>(variables)) {}

void EffectiveFactorGraph::add_edge(int observation, int variable, std::vector<cplx> coefficients) {
    if (observation < 0 || observation >= observation_count || variable < 0 || variable >= variable_count) {
        fail(ValidationError::Kind::Structure, "edge endpoint out of range");
    }
    if (static_cast<int>(coefficients.size()) != coefficient_length) {
        fail(ValidationError::Kind::Structure, "edge coefficient slice has wrong length");
    }
    if (std::all_of(coefficients.begin(), coefficients.end(), [](cplx v) { return v == cplx{}; })) {
        fail(ValidationError::Kind::Structure, "an all-zero coefficient slice is not an edge");
    }
    for (int e : variable_edges[static_cast<std::size_t>(variable)]) {
        if (edges[static_cast<std::size_t>(e)].observation == observation) {
            fail(ValidationError::Kind::Structure, "duplicate edge (" + std::to_string(observation) + ", " +
                                                       std::to_string(variable) + ")");
        }
    }
    const int id = static_cast<int>(edges.size());
    edges.push_back({observation, variable, std::move(coefficients)});
    observation_edges[static_cast<std::size_t>(observation)].push_back(id);
    variable_edges[static_cast<std::size_t>(variable)].push_back(id);
}

int EffectiveFactorGraph::max_observation_degree() const {
    int m = 0;
    for (int d = 0; d < observation_count; ++d) m = std::max(m, observation_degree(d));
    return m;
}

double EffectiveFactorGraph::mean_observation_degree() const {
    return observation_count == 0 ? 0.0 : static_cast<double>(edges.size()) / observation_count;
}

double EffectiveFactorGraph::mean_variable_degree() const {
    return variable_count == 0 ? 0.0 : static_cast<double>(edges.size()) / variable_count;
}

void DetectorConfig::validate() const {
    using Kind = ValidationError::Kind;
    if (max_iter < 1) fail(Kind::InvalidConfig, "max_iter must be at least 1");
    if (!(convergence_tol > 0.0)) fail(Kind::InvalidConfig, "convergence_tol must be positive");
    if (!(damping > 0.0 && damping <= 1.0)) fail(Kind::InvalidConfig, "damping must lie in (0, 1]");
    if (enumeration_cap < 1) fail(Kind::InvalidConfig, "enumeration_cap must be positive");
}

// ============================================================================
// MpaState
// ============================================================================

MpaState::MpaState(const EffectiveFactorGraph& graph, const VariableAlphabets& alphabets) {
    offsets_.reserve(graph.edges.size() + 1);
    offsets_.push_back(0);
    for (const auto& e : graph.edges) offsets_.push_back(offsets_.back() + alphabets[e.variable].size());
    posterior_offsets_.reserve(static_cast<std::size_t>(graph.variable_count) + 1);
    posterior_offsets_.push_back(0);
    for (int c = 0; c < graph.variable_count; ++c) {
        posterior_offsets_.push_back(posterior_offsets_.back() + alphabets[c].size());
    }
    log_u_.assign(offsets_.back(), 0.0);
    log_v_.assign(offsets_.back(), 0.0);
    log_post_.assign(posterior_offsets_.back(), 0.0);

    // Uniform 1/A start for every message.
    for (std::size_t e = 0; e + 1 < offsets_.size(); ++e) {
        const double u = -std::log(static_cast<double>(offsets_[e + 1] - offsets_[e]));
        std::fill(log_v_.begin() + static_cast<std::ptrdiff_t>(offsets_[e]),
                  log_v_.begin() + static_cast<std::ptrdiff_t>(offsets_[e + 1]), u);
        std::fill(log_u_.begin() + static_cast<std::ptrdiff_t>(offsets_[e]),
                  log_u_.begin() + static_cast<std::ptrdiff_t>(offsets_[e + 1]), u);
    }
    for (std::size_t c = 0; c + 1 < posterior_offsets_.size(); ++c) {
        const double u = -std::log(static_cast<double>(posterior_offsets_[c + 1] - posterior_offsets_[c]));
        std::fill(log_post_.begin() + static_cast<std::ptrdiff_t>(posterior_offsets_[c]),
                  log_post_.begin() + static_cast<std::ptrdiff_t>(posterior_offsets_[c + 1]), u);
    }
}

std::vector<double> MpaState::exp_span(const std::vector<double>& logs, std::size_t begin, std::size_t end) {
    std::vector<double> out;
    out.reserve(end - begin);
    for (std::size_t i = begin; i < end; ++i) out.push_back(std::exp(logs[i]));
    return out;
}

std::vector<double> MpaState::to_variable(int edge) const {
    return exp_span(log_u_, offsets_[static_cast<std::size_t>(edge)], offsets_[static_cast<std::size_t>(edge) + 1]);
}

std::vector<double> MpaState::to_observation(int edge) const {
    return exp_span(log_v_, offsets_[static_cast<std::size_t>(edge)], offsets_[static_cast<std::size_t>(edge) + 1]);
}

std::vector<double> MpaState::posterior(int variable) const {
    const auto c = static_cast<std::size_t>(variable);
    return exp_span(log_post_, posterior_offsets_[c], posterior_offsets_[c + 1]);
}

// ============================================================================
// Engine
// ============================================================================

class MpaEngine {
public:
    MpaEngine(const EffectiveFactorGraph& graph, const VariableAlphabets& alphabets, const CVector& y, double N0,
              const DetectorConfig& cfg)
        : graph_(graph), y_(y), inv_n0_(1.0 / std::max(N0, kNoiseFloor)), cfg_(cfg), state_(graph, alphabets) {
        // h_dc x_cm for every edge and candidate, the only quantity the
        // observation update needs.
        contrib_.resize(state_.offsets_.back());
        for (std::size_t e = 0; e < graph.edges.size(); ++e) {
            const auto& edge = graph.edges[e];
            const auto& alpha = alphabets[edge.variable];
            for (std::size_t m = 0; m < alpha.size(); ++m) {
                cplx s{};
                for (std::size_t t = 0; t < edge.coefficients.size(); ++t) s += edge.coefficients[t] * alpha[m][t];
                contrib_[state_.offsets_[e] + m] = s;
            }
        }
    }

    MpaResult run(const MpaObserver& observer) {
        MpaResult result;
        std::vector<double> previous = state_.log_post_;
        for (double& p : previous) p = std::exp(p);

        for (int it = 1; it <= cfg_.max_iter; ++it) {
            update_observations();
            update_variables();
            update_posteriors();
            state_.iteration_ = it;
            result.iterations = it;
            if (observer) observer(state_);

            double change = 0.0;
            for (std::size_t i = 0; i < previous.size(); ++i) {
                const double p = std::exp(state_.log_post_[i]);
                change = std::max(change, std::abs(p - previous[i]));
                previous[i] = p;
            }
            if (change < cfg_.convergence_tol) {
                result.converged = true;
                break;
            }
        }

        const auto& po = state_.posterior_offsets_;
        for (int c = 0; c < graph_.variable_count; ++c) {
            const auto b = po[static_cast<std::size_t>(c)];
            const auto e = po[static_cast<std::size_t>(c) + 1];
            int best = 0;
            for (std::size_t m = b + 1; m < e; ++m) {
                if (state_.log_post_[m] > state_.log_post_[b + static_cast<std::size_t>(best)]) {
                    best = static_cast<int>(m - b);
                }
            }
            result.decisions.push_back(best);
            result.posteriors.push_back(state_.posterior(c));
        }
        return result;
    }

private:
    std::size_t size_of(int edge) const {
        return state_.offsets_[static_cast<std::size_t>(edge) + 1] - state_.offsets_[static_cast<std::size_t>(edge)];
    }

    // U_{d->c}(m) = sum over the neighbors' joint alphabet of the Gaussian
    // likelihood times the product of incoming V messages, for every c in M_d.
    void update_observations() {
        for (int d = 0; d < graph_.observation_count; ++d) {
            const auto& ids = graph_.observation_edges[static_cast<std::size_t>(d)];
            const std::size_t D = ids.size();
            if (D == 0) continue;

            std::vector<std::size_t> radix(D);
            std::vector<std::size_t> base(D);
            for (std::size_t i = 0; i < D; ++i) {
                radix[i] = size_of(ids[i]);
                base[i] = state_.offsets_[static_cast<std::size_t>(ids[i])];
            }
            std::vector<std::vector<LogAcc>> acc(D);
            for (std::size_t i = 0; i < D; ++i) acc[i].resize(radix[i]);

            const cplx yd = y_[d];
            std::vector<std::size_t> digit(D, 0);
            std::vector<double> prefix(D + 1);
            std::vector<double> suffix(D + 1);
            while (true) {
                cplx s{};
                for (std::size_t i = 0; i < D; ++i) s += contrib_[base[i] + digit[i]];
                const double ll = -std::norm(yd - s) * inv_n0_;

                prefix[0] = 0.0;
                for (std::size_t i = 0; i < D; ++i) prefix[i + 1] = prefix[i] + state_.log_v_[base[i] + digit[i]];
                suffix[D] = 0.0;
                for (std::size_t i = D; i-- > 0;) suffix[i] = suffix[i + 1] + state_.log_v_[base[i] + digit[i]];
                for (std::size_t i = 0; i < D; ++i) acc[i][digit[i]].add(ll + prefix[i] + suffix[i + 1]);

                std::size_t pos = D;
                while (pos-- > 0) {
                    if (++digit[pos] < radix[pos]) break;
                    digit[pos] = 0;
                }
                if (pos == static_cast<std::size_t>(-1)) break;
            }

            for (std::size_t i = 0; i < D; ++i) {
                double* out = &state_.log_u_[base[i]];
                for (std::size_t m = 0; m < radix[i]; ++m) out[m] = acc[i][m].value();
                normalize_logs(out, radix[i]);
            }
        }
    }

    // V_{c->d} = product of U from the other neighbors, normalized.
    void update_variables() {
        for (int c = 0; c < graph_.variable_count; ++c) {
            const auto& ids = graph_.variable_edges[static_cast<std::size_t>(c)];
            for (int e : ids) {
                const std::size_t n = size_of(e);
                const std::size_t dst = state_.offsets_[static_cast<std::size_t>(e)];
                std::vector<double> fresh(n, 0.0);
                for (int other : ids) {
                    if (other == e) continue;
                    const std::size_t src = state_.offsets_[static_cast<std::size_t>(other)];
                    for (std::size_t m = 0; m < n; ++m) fresh[m] += state_.log_u_[src + m];
                }
                normalize_logs(fresh.data(), n);
                if (cfg_.damping < 1.0) {
                    for (std::size_t m = 0; m < n; ++m) {
                        const double mixed = cfg_.damping * std::exp(fresh[m]) +
                                             (1.0 - cfg_.damping) * std::exp(state_.log_v_[dst + m]);
                        fresh[m] = std::log(mixed);
                    }
                    normalize_logs(fresh.data(), n);
                }
                std::copy(fresh.begin(), fresh.end(), state_.log_v_.begin() + static_cast<std::ptrdiff_t>(dst));
            }
        }
    }

    void update_posteriors() {
        for (int c = 0; c < graph_.variable_count; ++c) {
            const std::size_t b = state_.posterior_offsets_[static_cast<std::size_t>(c)];
            const std::size_t n = state_.posterior_offsets_[static_cast<std::size_t>(c) + 1] - b;
            double* post = &state_.log_post_[b];
            std::fill(post, post + n, 0.0);
            for (int e : graph_.variable_edges[static_cast<std::size_t>(c)]) {
                const std::size_t src = state_.offsets_[static_cast<std::size_t>(e)];
                for (std::size_t m = 0; m < n; ++m) post[m] += state_.log_u_[src + m];
            }
            normalize_logs(post, n);
        }
    }

    const EffectiveFactorGraph& graph_;
    const CVector& y_;
    double inv_n0_;
    DetectorConfig cfg_;
    MpaState state_;
    std::vector<cplx> contrib_;
};

MpaResult run_mpa(const EffectiveFactorGraph& graph, const VariableAlphabets& alphabets, const CVector& y,
                  double N0, const DetectorConfig& cfg, const MpaObserver& observer) {
    cfg.validate();
    if (y.size() != graph.observation_count) {
        fail(ValidationError::Kind::Dimension, "observation vector has length " + std::to_string(y.size()) +
                                                   ", graph has " + std::to_string(graph.observation_count) +
                                                   " observation nodes");
    }
    if (static_cast<int>(alphabets.of_variable.size()) != graph.variable_count) {
        fail(ValidationError::Kind::Dimension, "alphabet map does not cover every variable node");
    }
    for (const auto& e : graph.edges) {
        for (const auto& word : alphabets[e.variable]) {
            if (word.size() != e.coefficients.size()) {
                fail(ValidationError::Kind::Dimension, "alphabet entries and coefficient slices differ in length");
            }
        }
    }
    const int degree = graph.max_observation_degree();
    if (degree > cfg.enumeration_cap) {
        std::uint64_t required = 1;
        for (int d = 0; d < graph.observation_count; ++d) {
            if (graph.observation_degree(d) != degree) continue;
            for (int e : graph.observation_edges[static_cast<std::size_t>(d)]) {
                required *= alphabets[graph.edges[static_cast<std::size_t>(e)].variable].size();
            }
            break;
        }
        throw ComplexityError("observation node of degree " + std::to_string(degree) +
                                  " exceeds the enumeration cap of " + std::to_string(cfg.enumeration_cap) +
                                  "; use fewer paths or a smaller grid",
                              required);
    }
    MpaEngine engine(graph, alphabets, y, N0, cfg);
    return engine.run(observer);
}

}  // namespace otfs
