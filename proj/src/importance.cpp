#include "momapos/importance.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "momapos/errors.hpp"
#include "momapos/random.hpp"

namespace momapos {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Walk sampler over precomputed transitions.
int sample_index(const std::vector<double>& cumulative, Rng& rng) {
  const double u = rng.uniform() * cumulative.back();
  const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
  return static_cast<int>(std::min<std::ptrdiff_t>(it - cumulative.begin(),
                                                   static_cast<std::ptrdiff_t>(cumulative.size()) - 1));
}

}  // namespace

int SceneGraph::node_of(const std::string& id) const {
  for (int i = 0; i < node_count(); ++i) {
    if (ids[i] == id) return i;
  }
  return -1;
}

SceneGraph build_scene_graph(const Scene& scene) {
  if (scene.size() == 0) throw EmptyScene("scene has no objects");
  SceneGraph g;
  double max_volume = 0.0;
  for (const auto& o : scene.objects()) {
    g.ids.push_back(o.id);
    g.positions.push_back(o.position);
    g.size.push_back(o.bbox.volume());
    max_volume = std::max(max_volume, o.bbox.volume());
  }
  for (auto& s : g.size) s = max_volume > 0.0 ? s / max_volume : 0.0;

  g.neighbors.resize(g.ids.size());
  auto link = [&](int a, int b) {
    auto& n = g.neighbors[a];
    if (std::find(n.begin(), n.end(), b) == n.end()) n.push_back(b);
  };
  for (const auto& r : scene.relations()) {
    const int from = g.node_of(r.parent_id);
    const int to = g.node_of(r.child_id);
    const double d = std::max(dist_xy(g.positions[from], g.positions[to]), kMinDistXy);
    g.edges.push_back({from, to, 1.0 / d});
    link(from, to);
    link(to, from);
  }
  return g;
}

Transition transition_probs(const SceneGraph& graph, int node, double k0) {
  if (node < 0 || node >= graph.node_count()) throw UnknownNode("node index out of range");
  Transition t;
  t.neighbors = graph.neighbors[node];
  if (t.neighbors.empty()) return t;
  double total = 0.0;
  for (int j : t.neighbors) {
    const double d = std::max(dist_xy(graph.positions[node], graph.positions[j]), kMinDistXy);
    const double w = k0 / d + (1.0 - k0) * graph.size[j];
    t.probs.push_back(w);
    total += w;
  }
  if (total > 0.0) {
    for (auto& p : t.probs) p /= total;
  } else {
    std::fill(t.probs.begin(), t.probs.end(), 1.0 / static_cast<double>(t.probs.size()));
  }
  return t;
}

std::vector<Walk> random_walks(const SceneGraph& graph, const WalkParams& params) {
  if (graph.node_count() == 0) throw EmptyScene("graph has no nodes");
  if (params.walks_per_node < 1 || params.walk_length < 2) {
    throw std::invalid_argument("walks_per_node >= 1 and walk_length >= 2 required");
  }
  std::vector<std::vector<double>> cumulative(graph.node_count());
  std::vector<Transition> transitions;
  for (int v = 0; v < graph.node_count(); ++v) {
    transitions.push_back(transition_probs(graph, v, params.k0));
    double acc = 0.0;
    for (double p : transitions.back().probs) cumulative[v].push_back(acc += p);
  }

  std::vector<Walk> walks;
  walks.reserve(static_cast<std::size_t>(graph.node_count()) * params.walks_per_node);
  for (int v = 0; v < graph.node_count(); ++v) {
    for (int w = 0; w < params.walks_per_node; ++w) {
      Rng rng(derive_seed(params.seed, {static_cast<std::uint64_t>(v), static_cast<std::uint64_t>(w)}));
      Walk walk{v};
      while (static_cast<int>(walk.size()) < params.walk_length) {
        const int cur = walk.back();
        if (transitions[cur].neighbors.empty()) break;
        walk.push_back(transitions[cur].neighbors[sample_index(cumulative[cur], rng)]);
      }
      walks.push_back(std::move(walk));
    }
  }
  return walks;
}

Embeddings initial_embeddings(int node_count, const EmbedParams& params) {
  Rng rng(derive_seed(params.seed, {0x1217}));
  Embeddings e(params.dim, node_count);
  for (int n = 0; n < node_count; ++n) {
    for (int k = 0; k < params.dim; ++k) e(k, n) = (rng.uniform() - 0.5) / params.dim;
  }
  return e;
}

SgnsGradient sgns_gradient(const Eigen::VectorXd& center, const Eigen::VectorXd& context,
                           const std::vector<Eigen::VectorXd>& negatives) {
  SgnsGradient g;
  const double sp = sigmoid(context.dot(center));
  g.loss = -std::log(sp);
  g.d_center = -(1.0 - sp) * context;
  g.d_context = -(1.0 - sp) * center;
  for (const auto& u : negatives) {
    const double sn = sigmoid(u.dot(center));
    g.loss -= std::log(1.0 - sn);
    g.d_center += sn * u;
    g.d_negatives.push_back(sn * center);
  }
  return g;
}

Embeddings train_embeddings(const std::vector<Walk>& walks, int node_count, const EmbedParams& params,
                            const EpochCallback& on_epoch) {
  if (walks.empty()) throw DegenerateCorpus("empty walk corpus");
  if (params.dim < 2 || params.window < 1 || params.negatives < 1) {
    throw std::invalid_argument("dim >= 2, window >= 1 and negatives >= 1 required");
  }
  Embeddings in = initial_embeddings(node_count, params);
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(params.dim, node_count);

  std::vector<double> freq(node_count, 0.0);
  std::size_t tokens = 0;
  bool has_pairs = false;
  for (const auto& w : walks) {
    for (int v : w) {
      if (v < 0 || v >= node_count) throw std::invalid_argument("walk references unknown node");
      freq[v] += 1.0;
    }
    tokens += w.size();
    has_pairs = has_pairs || w.size() > 1;
  }
  const auto distinct = std::count_if(freq.begin(), freq.end(), [](double f) { return f > 0.0; });
  if (!has_pairs) {
    if (distinct > 1) throw DegenerateCorpus("every walk has length 1");
    return in;
  }

  std::vector<double> noise;
  double acc = 0.0;
  for (double f : freq) noise.push_back(acc += std::pow(f, 0.75));

  Rng rng(derive_seed(params.seed, {0x5eed}));
  const int dim = params.dim;
  std::vector<double> grad_center(dim);
  const double total = static_cast<double>(tokens) * params.epochs;
  double processed = 0.0;

  auto update = [dim](const double* __restrict v, double* __restrict u, double* __restrict grad, double label,
                     double lr) {
    double dot = 0.0;
    for (int k = 0; k < dim; ++k) dot += v[k] * u[k];
    const double g = (label - sigmoid(dot)) * lr;
    for (int k = 0; k < dim; ++k) grad[k] += g * u[k];
    for (int k = 0; k < dim; ++k) u[k] += g * v[k];
  };

  for (int epoch = 0; epoch < params.epochs; ++epoch) {
    for (const auto& walk : walks) {
      const int len = static_cast<int>(walk.size());
      for (int i = 0; i < len; ++i) {
        const double lr = params.learning_rate * std::max(1e-4, 1.0 - processed / total);
        processed += 1.0;
        const int reach = params.window - static_cast<int>(rng.index(params.window));
        double* v = in.col(walk[i]).data();
        for (int j = std::max(0, i - reach); j <= std::min(len - 1, i + reach); ++j) {
          if (j == i) continue;
          const int context = walk[j];
          std::fill(grad_center.begin(), grad_center.end(), 0.0);
          update(v, out.col(context).data(), grad_center.data(), 1.0, lr);
          for (int n = 0; n < params.negatives; ++n) {
            const int neg = sample_index(noise, rng);
            if (neg == context) continue;
            update(v, out.col(neg).data(), grad_center.data(), 0.0, lr);
          }
          for (int k = 0; k < dim; ++k) v[k] += grad_center[k];
        }
      }
    }
    if (on_epoch) on_epoch(epoch, in);
  }
  return in;
}

std::map<std::string, double> importance_scores(const Embeddings& embeddings,
                                                const std::vector<std::string>& ids,
                                                const std::string& target) {
  const auto it = std::find(ids.begin(), ids.end(), target);
  if (it == ids.end()) throw UnknownTarget("no embedding for target '" + target + "'");
  const Eigen::VectorXd vt = embeddings.col(it - ids.begin());
  std::map<std::string, double> scores;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] == target) {
      scores[ids[i]] = 1.0;
      continue;
    }
    const Eigen::VectorXd vi = embeddings.col(static_cast<Eigen::Index>(i));
    const double denom = vi.norm() * vt.norm();
    const double cosine = denom > 0.0 ? std::clamp(vi.dot(vt) / denom, -1.0, 1.0) : 0.0;
    scores[ids[i]] = std::clamp((cosine + 1.0) / 2.0, kMinImportance, 1.0);
  }
  return scores;
}

ImportanceResult select_objects(const std::map<std::string, double>& scores, const std::string& target,
                                double alpha) {
  if (scores.empty()) throw std::invalid_argument("no scores to select from");
  ImportanceResult r;
  r.target = target;
  r.scores = scores;
  r.threshold_used = alpha;
  for (const auto& [id, f] : scores) {
    if (f >= alpha) r.selected.insert(id);
  }
  r.selected.insert(target);
  return r;
}

std::map<std::string, double> predict_importance(const Scene& scene, const std::string& target,
                                                 const ImportanceParams& params) {
  scene.at(target);
  const SceneGraph graph = build_scene_graph(scene);
  const auto walks = random_walks(graph, params.walk);
  const Embeddings emb = train_embeddings(walks, graph.node_count(), params.embed);
  return importance_scores(emb, graph.ids, target);
}

std::string importance_csv(const ImportanceResult& result) {
  std::ostringstream out;
  out.precision(17);
  out << "id,score,selected\n";
  for (const auto& [id, f] : result.scores) {
    out << id << ',' << f << ',' << (result.selected.count(id) ? 1 : 0) << '\n';
  }
  return out.str();
}

void write_importance_csv(const ImportanceResult& result, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << importance_csv(result);
}

}  // namespace momapos
