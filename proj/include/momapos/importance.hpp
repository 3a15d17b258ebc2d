#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "momapos/scene.hpp"

namespace momapos {

/// Directed parent -> child edge with weight 1 / max(dist_xy, kMinDistXy).
struct GraphEdge {
  int from = 0;
  int to = 0;
  double weight = 0.0;
};

struct SceneGraph {
  std::vector<std::string> ids;
  std::vector<Vec3> positions;
  /// Box volume normalized by the scene maximum, in [0, 1].
  std::vector<double> size;
  std::vector<GraphEdge> edges;
  /// Undirected neighbor lists in edge order, duplicates removed.
  std::vector<std::vector<int>> neighbors;

  int node_count() const { return static_cast<int>(ids.size()); }
  int node_of(const std::string& id) const;
};

inline constexpr double kMinDistXy = 0.01;

SceneGraph build_scene_graph(const Scene& scene);

struct Transition {
  std::vector<int> neighbors;
  std::vector<double> probs;
};

/// P(v_i, v_j) proportional to k0 / dist_xy + (1 - k0) * size(v_j) over the
/// undirected neighbors of v_i; empty for isolated nodes.
Transition transition_probs(const SceneGraph& graph, int node, double k0);

struct WalkParams {
  double k0 = 0.7;
  int walks_per_node = 10;
  int walk_length = 8;
  std::uint64_t seed = 0;
};

using Walk = std::vector<int>;

/// walks_per_node walks from every node. Walk w from node v draws from its own
/// stream derived from (seed, v, w).
std::vector<Walk> random_walks(const SceneGraph& graph, const WalkParams& params);

struct EmbedParams {
  int dim = 32;
  int window = 3;
  int negatives = 5;
  int epochs = 50;
  double learning_rate = 0.025;
  std::uint64_t seed = 0;
};

/// One column per node (the input vectors of the skip-gram model).
using Embeddings = Eigen::MatrixXd;

/// Optional per-epoch observer, called with (epoch index, current embeddings).
using EpochCallback = std::function<void(int, const Embeddings&)>;

/// Skip-gram with negative sampling over (center, context) pairs within a
/// word2vec-style reduced window; linear learning-rate decay.
Embeddings train_embeddings(const std::vector<Walk>& walks, int node_count, const EmbedParams& params,
                            const EpochCallback& on_epoch = nullptr);

/// Seeded initial input vectors (what training starts from).
Embeddings initial_embeddings(int node_count, const EmbedParams& params);

/// Loss -log s(u_pos . v) - sum log s(-u_neg . v) and its analytic gradients.
struct SgnsGradient {
  double loss = 0.0;
  Eigen::VectorXd d_center;
  Eigen::VectorXd d_context;
  std::vector<Eigen::VectorXd> d_negatives;
};

SgnsGradient sgns_gradient(const Eigen::VectorXd& center, const Eigen::VectorXd& context,
                           const std::vector<Eigen::VectorXd>& negatives);

inline constexpr double kMinImportance = 1e-6;

/// f(o_i, o_t) = clamp((cos(v_i, v_t) + 1) / 2, 1e-6, 1); exactly 1 for the target.
std::map<std::string, double> importance_scores(const Embeddings& embeddings,
                                                const std::vector<std::string>& ids,
                                                const std::string& target);

struct ImportanceResult {
  std::string target;
  std::map<std::string, double> scores;
  double threshold_used = 0.0;
  ObjectSet selected;
};

ImportanceResult select_objects(const std::map<std::string, double>& scores, const std::string& target,
                                double alpha);

struct ImportanceParams {
  WalkParams walk;
  EmbedParams embed;
};

/// Graph -> walks -> embeddings -> scores for one target.
std::map<std::string, double> predict_importance(const Scene& scene, const std::string& target,
                                                 const ImportanceParams& params);

void write_importance_csv(const ImportanceResult& result, const std::filesystem::path& path);
std::string importance_csv(const ImportanceResult& result);

}  // namespace momapos
