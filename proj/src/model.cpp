#include "sizegraph/model.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "sizegraph/error.hpp"

namespace sizegraph {

using nlohmann::json;

namespace {

constexpr double kLogTwoPi = 1.8378770664093454836;  // ln(2*pi)

double log_normal_density(double y, double mean, double var) {
    const double d = y - mean;
    return -0.5 * (kLogTwoPi + std::log(var)) - d * d / (2.0 * var);
}

// Pairwise lists touching node i, as (other node, sign) where sign orients
// the stored y = log(size_lo) - log(size_hi) to "i minus other".
struct Incident {
    int other;
    double sign;
    const std::vector<double>* ys;
};

std::vector<Incident> incident_lists(int i, const ObservationSet& obs) {
    std::vector<Incident> out;
    for (const auto& [key, ys] : obs.pairwise) {
        if (ys.empty()) continue;
        if (key.first == i)
            out.push_back({key.second, +1.0, &ys});
        else if (key.second == i)
            out.push_back({key.first, -1.0, &ys});
    }
    return out;
}

bool touched(int i, const ObservationSet& obs) {
    if (!obs.unary[i].empty()) return true;
    for (const auto& [key, ys] : obs.pairwise)
        if (!ys.empty() && (key.first == i || key.second == i)) return true;
    return false;
}

// Likelihood restricted to terms involving node i; enough for the sigma line
// search since all other terms are constant in sigma_i.
double node_local_likelihood(int i, const LogNormalModel& model, const ObservationSet& obs) {
    const auto& p = model.params[i];
    double ll = 0.0;
    for (const auto& inc : incident_lists(i, obs)) {
        const auto& q = model.params[inc.other];
        const double var = p.sigma * p.sigma + q.sigma * q.sigma;
        const double mean = inc.sign * (p.mu - q.mu);
        for (double y : *inc.ys) ll += log_normal_density(y, mean, var);
    }
    for (double y : obs.unary[i]) ll += log_normal_density(y, p.mu, p.sigma * p.sigma);
    return ll;
}

void check_obs_bound(const ObservationSet& obs, const SizeGraph& graph) {
    if (obs.n != graph.n())
        throw DataError("observation set and size graph disagree on object count");
    for (const auto& [key, ys] : obs.pairwise) {
        (void)ys;
        if (!graph.has_edge(key.first, key.second))
            throw DataError("observation set has a pair that is not a size-graph edge");
    }
}

}  // namespace

double log_likelihood(const LogNormalModel& model, const ObservationSet& obs,
                      const SizeGraph& graph) {
    if (model.n() != graph.n())
        throw DataError("model and size graph disagree on object count");
    check_obs_bound(obs, graph);

    double ll = 0.0;
    for (const auto& [key, ys] : obs.pairwise) {
        const auto& pi = model.params[key.first];
        const auto& pj = model.params[key.second];
        const double var = pi.sigma * pi.sigma + pj.sigma * pj.sigma;
        const double mean = pi.mu - pj.mu;
        for (double y : ys) ll += log_normal_density(y, mean, var);
    }
    for (int i = 0; i < obs.n; ++i) {
        const auto& p = model.params[i];
        for (double y : obs.unary[i])
            ll += log_normal_density(y, p.mu, p.sigma * p.sigma);
    }
    return ll;
}

double update_mu(int i, const LogNormalModel& model, const ObservationSet& obs) {
    if (i < 0 || i >= model.n()) throw DataError("node id out of range");

    // Precision-weighted mean: each pairwise sample y (oriented i minus j)
    // votes for mu_i = y + mu_j with weight 1/(sigma_i^2 + sigma_j^2); each
    // unary sample votes for mu_i = y with weight 1/sigma_i^2.
    double num = 0.0, den = 0.0;
    const auto& p = model.params[i];
    for (const auto& inc : incident_lists(i, obs)) {
        const auto& q = model.params[inc.other];
        const double w = 1.0 / (p.sigma * p.sigma + q.sigma * q.sigma);
        for (double y : *inc.ys) {
            num += (inc.sign * y + q.mu) * w;
            den += w;
        }
    }
    const double wu = 1.0 / (p.sigma * p.sigma);
    for (double y : obs.unary[i]) {
        num += y * wu;
        den += wu;
    }

    if (den == 0.0)
        throw DataError("unconstrained node " + std::to_string(i) +
                        ": no observation touches it");
    return num / den;
}

double sigma_gradient(int i, const LogNormalModel& model, const ObservationSet& obs) {
    if (i < 0 || i >= model.n()) throw DataError("node id out of range");

    const auto& p = model.params[i];
    const double s = p.sigma;
    double grad = 0.0;
    bool any = false;

    for (const auto& inc : incident_lists(i, obs)) {
        const auto& q = model.params[inc.other];
        const double var = s * s + q.sigma * q.sigma;
        const double mean = inc.sign * (p.mu - q.mu);
        for (double y : *inc.ys) {
            const double d = y - mean;
            grad += s * d * d / (var * var) - s / var;
            any = true;
        }
    }
    for (double y : obs.unary[i]) {
        const double d = y - p.mu;
        grad += d * d / (s * s * s) - 1.0 / s;
        any = true;
    }

    if (!any)
        throw DataError("unconstrained node " + std::to_string(i) +
                        ": no observation touches it");
    return grad;
}

LogNormalModel initialize(const ObservationSet& obs, const SizeGraph& graph) {
    check_obs_bound(obs, graph);
    const int n = graph.n();
    LogNormalModel model;
    model.params.assign(n, {});
    model.anchored.assign(n, 0);

    std::vector<char> covered(n, 0);
    for (int i = 0; i < n; ++i) {
        const auto& ys = obs.unary[i];
        if (ys.empty()) continue;
        covered[i] = 1;
        const double mean =
            std::accumulate(ys.begin(), ys.end(), 0.0) / static_cast<double>(ys.size());
        model.params[i].mu = mean;
        if (ys.size() == 1) {
            model.params[i].sigma = 1.0;
        } else {
            double ss = 0.0;
            for (double y : ys) ss += (y - mean) * (y - mean);
            model.params[i].sigma =
                std::max(kSigmaMin, std::sqrt(ss / static_cast<double>(ys.size() - 1)));
        }
    }

    // Per-edge median log ratio, used to walk mu estimates outward from the
    // covered nodes. Edges without samples propagate with shift 0.
    std::map<std::pair<int, int>, double> edge_median;
    for (const auto& [key, ys] : obs.pairwise) {
        if (ys.empty()) continue;
        std::vector<double> sorted = ys;
        std::sort(sorted.begin(), sorted.end());
        const std::size_t m = sorted.size() / 2;
        edge_median[key] =
            sorted.size() % 2 ? sorted[m] : 0.5 * (sorted[m - 1] + sorted[m]);
    }

    std::vector<std::vector<int>> adj(n);
    for (const auto& e : graph.edges) {
        adj[e.i].push_back(e.j);
        adj[e.j].push_back(e.i);
    }
    for (auto& a : adj) {
        std::sort(a.begin(), a.end());
        a.erase(std::unique(a.begin(), a.end()), a.end());
    }

    std::deque<int> frontier;
    for (int i = 0; i < n; ++i)
        if (covered[i]) frontier.push_back(i);
    if (frontier.empty()) {
        // No unary evidence anywhere: pin node 0 and spread from there.
        covered[0] = 1;
        model.params[0].mu = 0.0;
        frontier.push_back(0);
    }
    while (!frontier.empty()) {
        const int u = frontier.front();
        frontier.pop_front();
        for (int v : adj[u]) {
            if (covered[v]) continue;
            const auto key = std::minmax(u, v);
            double shift = 0.0;
            if (auto it = edge_median.find({key.first, key.second}); it != edge_median.end())
                shift = it->second;
            // stored medians estimate mu_lo - mu_hi
            const double y_vu = (v < u) ? shift : -shift;
            model.params[v].mu = model.params[u].mu + y_vu;
            model.params[v].sigma = 1.0;
            covered[v] = 1;
            frontier.push_back(v);
        }
    }

    return model;
}

FitResult fit(const SizeGraph& graph, const ObservationSet& obs,
              const FitConfig& config,
              const std::map<int, LogNormalParams>& anchors) {
    if (obs.empty()) throw DataError("cannot fit: observation set is empty");
    if (!(config.eta > 0.0) || config.max_sweeps < 1 || !(config.rel_tol > 0.0) ||
        config.max_backtracks < 0)
        throw DataError("invalid fit configuration");

    FitResult out;
    out.model = initialize(obs, graph);
    const int n = out.model.n();

    for (const auto& [id, p] : anchors) {
        if (id < 0 || id >= n) throw DataError("anchor id out of range");
        out.model.params[id] = {p.mu, std::max(kSigmaMin, p.sigma)};
        out.model.anchored[id] = 1;
    }

    std::vector<char> active(n, 0);
    for (int i = 0; i < n; ++i)
        active[i] = !out.model.anchored[i] && touched(i, obs);

    double ll = log_likelihood(out.model, obs, graph);
    if (!std::isfinite(ll)) throw DataError("non-finite likelihood at initialization");
    out.trace.push_back(ll);

    for (int sweep = 0; sweep < config.max_sweeps; ++sweep) {
        for (int i = 0; i < n; ++i) {
            if (!active[i]) continue;
            auto& p = out.model.params[i];

            p.mu = update_mu(i, out.model, obs);

            // One ascent step on sigma_i. The likelihood is separable: only
            // node-local terms move, so the line search compares those.
            const double before = node_local_likelihood(i, out.model, obs);
            if (!std::isfinite(before))
                throw DataError("non-finite likelihood at node " + std::to_string(i));
            const double grad = sigma_gradient(i, out.model, obs);
            const double sigma0 = p.sigma;
            double step = config.eta;
            for (int bt = 0; bt <= config.max_backtracks; ++bt) {
                p.sigma = std::max(kSigmaMin, sigma0 + step * grad);
                if (node_local_likelihood(i, out.model, obs) >= before) break;
                p.sigma = sigma0;  // candidate rejected
                step *= 0.5;
            }
        }

        const double next = log_likelihood(out.model, obs, graph);
        if (!std::isfinite(next)) throw DataError("non-finite likelihood during fit");
        out.trace.push_back(next);
        ++out.sweeps;
        const double gain = next - ll;
        ll = next;
        if (gain < config.rel_tol * std::max(1.0, std::abs(next))) break;
    }

    out.loglik = ll;
    return out;
}

// ---------------------------------------------------------------------------
// Serialization

std::string model_to_json(const NamedModel& m) {
    if (m.vocab.size() != m.model.n())
        throw DataError("model and vocabulary disagree on object count");
    json objects = json::object();
    for (int i = 0; i < m.model.n(); ++i) {
        objects[m.vocab.names[i]] = {{"mu", m.model.params[i].mu},
                                     {"sigma", m.model.params[i].sigma},
                                     {"anchored", static_cast<bool>(m.model.anchored[i])}};
    }
    json doc{{"objects", objects},
             {"meta",
              {{"sweeps", m.meta.sweeps},
               {"loglik", m.meta.loglik},
               {"scale", to_string(m.meta.scale)}}}};
    return doc.dump(2) + "\n";
}

NamedModel model_from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw DataError(std::string("invalid model JSON: ") + e.what());
    }

    NamedModel m;
    try {
        const auto& objects = doc.at("objects");
        std::vector<std::string> names;
        for (auto it = objects.begin(); it != objects.end(); ++it) names.push_back(it.key());
        m.vocab = ObjectVocab::from_names(names);
        m.model.params.assign(m.vocab.size(), {});
        m.model.anchored.assign(m.vocab.size(), 0);
        for (auto it = objects.begin(); it != objects.end(); ++it) {
            const int id = m.vocab.id_of(it.key());
            m.model.params[id].mu = it.value().at("mu").get<double>();
            m.model.params[id].sigma = it.value().at("sigma").get<double>();
            m.model.anchored[id] = it.value().value("anchored", false) ? 1 : 0;
        }
        const auto& meta = doc.at("meta");
        m.meta.sweeps = meta.at("sweeps").get<int>();
        m.meta.loglik = meta.at("loglik").get<double>();
        m.meta.scale = scale_from_string(meta.at("scale").get<std::string>());
    } catch (const json::exception& e) {
        throw DataError(std::string("invalid model JSON: ") + e.what());
    }

    for (const auto& p : m.model.params) {
        if (!std::isfinite(p.mu) || !(p.sigma >= kSigmaMin) || !std::isfinite(p.sigma))
            throw DataError("model JSON: mu must be finite and sigma >= 0.001");
    }
    return m;
}

void save_model(const NamedModel& m, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write file: " + path);
    out << model_to_json(m);
    if (!out) throw DataError("failed while writing: " + path);
}

NamedModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return model_from_json(ss.str());
}

std::map<int, LogNormalParams> load_anchors(const std::string& path,
                                            const ObjectVocab& vocab) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();

    json doc;
    try {
        doc = json::parse(ss.str());
    } catch (const json::exception& e) {
        throw DataError(std::string("invalid anchors JSON: ") + e.what());
    }
    if (!doc.is_object()) throw DataError("anchors JSON must be an object keyed by name");

    std::map<int, LogNormalParams> anchors;
    for (auto it = doc.begin(); it != doc.end(); ++it) {
        const int id = vocab.id_of(it.key());
        const auto& entry = it.value();
        LogNormalParams p;
        try {
            if (entry.contains("mu")) {
                p.mu = entry.at("mu").get<double>();
            } else if (entry.contains("size_m")) {
                const double size_m = entry.at("size_m").get<double>();
                if (!(size_m > 0.0)) throw DataError("anchor size_m must be positive: " + it.key());
                p.mu = std::log(size_m);
            } else {
                throw DataError("anchor entry needs mu or size_m: " + it.key());
            }
            p.sigma = entry.at("sigma").get<double>();
        } catch (const json::exception& e) {
            throw DataError("invalid anchor entry for " + it.key() + ": " + e.what());
        }
        if (!std::isfinite(p.mu) || !std::isfinite(p.sigma) || !(p.sigma > 0.0))
            throw DataError("anchor for " + it.key() + " needs finite mu and positive sigma");
        p.sigma = std::max(kSigmaMin, p.sigma);
        anchors[id] = p;
    }
    return anchors;
}

}  // namespace sizegraph
