#include <doctest.h>

#include <cmath>

#include "momapos/errors.hpp"
#include "momapos/importance.hpp"
#include "momapos/random.hpp"
#include "support.hpp"

using namespace momapos;

namespace {

ObjectInstance cube_at(const std::string& id, double x, double y, double z = 0.0, double s = 0.1) {
  return make_box(id, Vec3(x - s / 2, y - s / 2, z), Vec3(x + s / 2, y + s / 2, z + s));
}

Scene two_objects(double distance) {
  return Scene({cube_at("table", 1.0, 1.0), cube_at("cup", 1.0 + distance, 1.0)}, {{"table", "cup", RelationType::on}},
               Rect2{Vec2(0, 0), Vec2(5, 5)});
}

}  // namespace

TEST_CASE("graph: edge weights") {
  const SceneGraph g = build_scene_graph(two_objects(0.5));
  REQUIRE(g.edges.size() == 1);
  CHECK(g.edges[0].weight == doctest::Approx(2.0).epsilon(1e-12));

  const Scene stacked({cube_at("table", 1.0, 1.0), cube_at("cup", 1.0, 1.0, 0.1)}, {{"table", "cup", RelationType::on}},
                      Rect2{Vec2(0, 0), Vec2(5, 5)});
  CHECK(build_scene_graph(stacked).edges[0].weight == doctest::Approx(1.0 / kMinDistXy).epsilon(1e-12));
}

TEST_CASE("graph: kitchen node and edge counts match a recount") {
  const Scene s = kitchen_fixture();
  const SceneGraph g = build_scene_graph(s);
  CHECK(g.node_count() == 30);
  CHECK(g.edges.size() == s.relations().size());
  // Recount: each relation contributes one directed edge between the right nodes.
  for (std::size_t i = 0; i < s.relations().size(); ++i) {
    CHECK(g.ids[g.edges[i].from] == s.relations()[i].parent_id);
    CHECK(g.ids[g.edges[i].to] == s.relations()[i].child_id);
  }
  for (double sz : g.size) {
    CHECK(sz >= 0.0);
    CHECK(sz <= 1.0);
  }
  CHECK_THROWS_AS(transition_probs(g, 30, 0.7), UnknownNode);
}

TEST_CASE("walk: transition probabilities") {
  const SceneGraph one = build_scene_graph(two_objects(0.5));
  const Transition t = transition_probs(one, 0, 0.7);
  REQUIRE(t.probs.size() == 1);
  CHECK(t.probs[0] == doctest::Approx(1.0));

  // Two equal neighbors.
  const Scene sym({cube_at("c", 2, 2), cube_at("a", 1, 2), cube_at("b", 3, 2)},
                  {{"c", "a", RelationType::on}, {"c", "b", RelationType::on}}, Rect2{Vec2(0, 0), Vec2(5, 5)});
  const Transition ts = transition_probs(build_scene_graph(sym), 0, 0.7);
  CHECK(ts.probs[0] == doctest::Approx(0.5));
  CHECK(ts.probs[1] == doctest::Approx(0.5));

  // k0 = 1, neighbors at 1 m and 3 m: w = {1, 1/3} -> {0.75, 0.25}.
  const Scene far({cube_at("c", 1, 1), cube_at("a", 2, 1), cube_at("b", 4, 1)},
                  {{"c", "a", RelationType::on}, {"c", "b", RelationType::on}}, Rect2{Vec2(0, 0), Vec2(5, 5)});
  const Transition tf = transition_probs(build_scene_graph(far), 0, 1.0);
  CHECK(tf.probs[0] == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(tf.probs[1] == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("walk: forced alternation and determinism") {
  const SceneGraph g = build_scene_graph(two_objects(0.5));
  WalkParams p;
  p.seed = 3;
  const auto walks = random_walks(g, p);
  CHECK(walks.size() == 2u * p.walks_per_node);
  for (const auto& w : walks) {
    CHECK(w.size() == static_cast<std::size_t>(p.walk_length));
    for (std::size_t i = 1; i < w.size(); ++i) CHECK(w[i] != w[i - 1]);
  }
  CHECK(random_walks(g, p) == walks);

  // Isolated nodes give length-1 walks.
  const Scene lonely({cube_at("a", 1, 1), cube_at("b", 3, 3)}, {}, Rect2{Vec2(0, 0), Vec2(5, 5)});
  for (const auto& w : random_walks(build_scene_graph(lonely), p)) CHECK(w.size() == 1);
}

TEST_CASE("walk: star graph visit frequency matches the transition probability") {
  std::vector<ObjectInstance> objs{cube_at("hub", 12, 12), cube_at("near", 12.1, 12)};
  std::vector<SpatialRelation> rels{{"hub", "near", RelationType::on}};
  for (int k = 0; k < 4; ++k) {
    const double a = 0.5 + k * 1.3;
    objs.push_back(cube_at("far" + std::to_string(k), 12 + 10 * std::cos(a), 12 + 10 * std::sin(a)));
    rels.push_back({"hub", "far" + std::to_string(k), RelationType::on});
  }
  const Scene star(objs, rels, Rect2{Vec2(0, 0), Vec2(25, 25)});
  const SceneGraph g = build_scene_graph(star);
  const Transition t = transition_probs(g, 0, 1.0);
  const double p_near = t.probs[0];
  CHECK(p_near == doctest::Approx(10.0 / (10.0 + 4 * 0.1)).epsilon(1e-9));

  WalkParams p;
  p.k0 = 1.0;
  p.walks_per_node = 1000;
  p.walk_length = 5;
  p.seed = 17;
  int from_hub = 0, to_near = 0;
  for (const auto& w : random_walks(g, p)) {
    for (std::size_t i = 1; i < w.size(); ++i) {
      if (w[i - 1] != 0) continue;
      ++from_hub;
      to_near += w[i] == 1;
    }
  }
  REQUIRE(from_hub >= 10000);
  const double freq = static_cast<double>(to_near) / from_hub;
  const double se = std::sqrt(p_near * (1 - p_near) / from_hub);
  CHECK(std::abs(freq - p_near) <= 3 * se);
}

TEST_CASE("embed: single-node corpus returns the initialization") {
  EmbedParams p;
  p.seed = 4;
  const Embeddings e = train_embeddings({{0}}, 1, p);
  CHECK(e.allFinite());
  CHECK(e == initial_embeddings(1, p));
  CHECK_THROWS_AS(train_embeddings({}, 1, p), DegenerateCorpus);
  CHECK_THROWS_AS(train_embeddings({{0}, {1}}, 2, p), DegenerateCorpus);
}

TEST_CASE("embed: co-occurring nodes grow more similar") {
  // Nodes 0 and 1 always appear together; 2 and 3 form a separate pair.
  std::vector<Walk> walks;
  for (int i = 0; i < 40; ++i) {
    walks.push_back({0, 1, 0, 1, 0, 1});
    walks.push_back({2, 3, 2, 3, 2, 3});
  }
  EmbedParams p;
  p.dim = 16;
  p.epochs = 30;
  p.seed = 8;
  std::vector<double> cosines;
  auto cos = [](const Embeddings& e, int a, int b) {
    return e.col(a).dot(e.col(b)) / (e.col(a).norm() * e.col(b).norm());
  };
  const Embeddings final_e =
      train_embeddings(walks, 4, p, [&](int, const Embeddings& e) { cosines.push_back(cos(e, 0, 1)); });
  REQUIRE(cosines.size() == 30);
  CHECK(final_e.allFinite());
  CHECK(cosines.back() > cos(initial_embeddings(4, p), 0, 1) + 0.5);
  CHECK(cos(final_e, 0, 1) > cos(final_e, 0, 2) + 0.3);
  CHECK(cos(final_e, 2, 3) > cos(final_e, 1, 3) + 0.3);
}

TEST_CASE("embed: training is deterministic") {
  const Scene s = kitchen_fixture();
  ImportanceParams p;
  p.walk.seed = 21;
  p.embed.seed = 22;
  CHECK(predict_importance(s, "fridge", p) == predict_importance(s, "fridge", p));
}

TEST_CASE("embed: analytic gradient matches central differences") {
  Rng rng(31);
  auto random_vec = [&](int n) {
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = rng.uniform(-1, 1);
    return v;
  };
  constexpr double h = 1e-6;
  constexpr double rel_tol = 1e-4;
  const Eigen::VectorXd c = random_vec(8), u = random_vec(8);
  const std::vector<Eigen::VectorXd> neg{random_vec(8), random_vec(8)};
  const SgnsGradient g = sgns_gradient(c, u, neg);
  auto loss = [&](const Eigen::VectorXd& cc, const Eigen::VectorXd& uu, const std::vector<Eigen::VectorXd>& nn) {
    return sgns_gradient(cc, uu, nn).loss;
  };
  for (int i = 0; i < 8; ++i) {
    Eigen::VectorXd cp = c, cm = c;
    cp[i] += h;
    cm[i] -= h;
    const double fd = (loss(cp, u, neg) - loss(cm, u, neg)) / (2 * h);
    CHECK(std::abs(fd - g.d_center[i]) <= rel_tol * std::max(1.0, std::abs(fd)));
    Eigen::VectorXd up = u, um = u;
    up[i] += h;
    um[i] -= h;
    const double fdu = (loss(c, up, neg) - loss(c, um, neg)) / (2 * h);
    CHECK(std::abs(fdu - g.d_context[i]) <= rel_tol * std::max(1.0, std::abs(fdu)));
  }
}

TEST_CASE("score: cosine mapping") {
  Embeddings e(2, 4);
  e.col(0) = Eigen::Vector2d(1, 0);   // target
  e.col(1) = Eigen::Vector2d(2, 0);   // parallel
  e.col(2) = Eigen::Vector2d(0, 3);   // orthogonal
  e.col(3) = Eigen::Vector2d(-1, 0);  // antiparallel
  const auto s = importance_scores(e, {"t", "p", "o", "a"}, "t");
  CHECK(s.at("t") == 1.0);
  CHECK(s.at("p") == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(s.at("o") == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(s.at("a") == kMinImportance);
  CHECK_THROWS_AS(importance_scores(e, {"t", "p", "o", "a"}, "missing"), UnknownTarget);
}

TEST_CASE("select: threshold rules") {
  const std::map<std::string, double> scores{{"a", 0.9}, {"b", 0.4}, {"c", 0.5}, {"target", 1.0}};
  CHECK(select_objects(scores, "target", 0.45).selected == ObjectSet{"a", "c", "target"});
  CHECK(select_objects(scores, "target", 0.0).selected.size() == 4);
  CHECK(select_objects(scores, "target", 1.0).selected.count("target") == 1);

  // Selection is monotone in alpha.
  ObjectSet prev = select_objects(scores, "target", 1.0).selected;
  for (double alpha = 0.95; alpha >= 0.0; alpha -= 0.05) {
    const ObjectSet cur = select_objects(scores, "target", alpha).selected;
    CHECK(std::includes(cur.begin(), cur.end(), prev.begin(), prev.end()));
    prev = cur;
  }
}
