#include <gtest/gtest.h>

#include <cmath>

#include "affgest/bayesnet.hpp"
#include "affgest/error.hpp"
#include "affgest/simgen.hpp"

namespace affgest {
namespace {

TEST(Rng, StandardEngineSequence) {
  // mt19937_64 default-seed 10000th output is fixed by the C++ standard.
  Rng r(5489u);
  std::uint64_t x = 0;
  for (int i = 0; i < 10000; ++i) x = r.next();
  EXPECT_EQ(x, 9981545732273789042ull);
}

TEST(Rng, UniformInRangeAndIndexBounded) {
  Rng r(1);
  for (int i = 0; i < 10000; ++i) {
    const double u = r.uniform();
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
    EXPECT_LT(r.index(7), 7u);
  }
}

TEST(Rng, NormalMoments) {
  Rng r(2);
  double s = 0, s2 = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double x = r.normal();
    s += x;
    s2 += x * x;
  }
  EXPECT_NEAR(s / n, 0.0, 0.01);
  EXPECT_NEAR(s2 / n, 1.0, 0.02);
}

TEST(WorldTable, StandardIsValid) {
  const auto t = WorldTable::standard();
  EXPECT_NO_THROW(t.validate());
  EXPECT_EQ(t.effect_dist.size(), 18u);
  auto broken = t;
  broken.effect_dist.begin()->second = {0.5, 0.5, 0.5};
  EXPECT_THROW(broken.validate(), Error);
  auto missing = t;
  missing.effect_dist.erase(missing.effect_dist.begin());
  EXPECT_THROW(missing.validate(), Error);
}

TEST(WorldTable, QualitativePhysics) {
  const auto t = WorldTable::standard();
  auto best = [&](const char* a, const char* s, const char* z) {
    const auto& r = t.row(a, s, z);
    return objvel_domain().value(static_cast<std::size_t>(std::max_element(r.begin(), r.end()) - r.begin()));
  };
  EXPECT_EQ(best("tap", "sphere", "small"), "fast");
  EXPECT_EQ(best("tap", "box", "big"), "slow");
  EXPECT_EQ(best("touch", "box", "small"), "slow");
  EXPECT_EQ(best("grasp", "sphere", "medium"), "medium");
}

TEST(Grammar, StandardValidAndHasWordFamilies) {
  const auto g = UtteranceGrammar::standard();
  EXPECT_NO_THROW(g.validate());
  const auto w = g.words();
  for (const char* word : {"tap", "taps", "tapping", "push", "pushes", "pushing", "touch", "touches", "touching",
                           "poke", "pokes", "poking", "grasp", "grasps", "grasping", "roll", "rolls", "rolling",
                           "slide", "slides", "ball", "box", "small", "big", "slowly", "quickly", "still"}) {
    EXPECT_TRUE(w.contains(word)) << word;
  }
}

TEST(Grammar, MissingSlotRejected) {
  auto g = UtteranceGrammar::standard();
  g.lexicon.erase("size=big");
  EXPECT_THROW(g.validate(), Error);
  auto h = UtteranceGrammar::standard();
  h.lexicon["size=big"][0].weight += 0.1;
  EXPECT_THROW(h.validate(), Error);
}

TEST(Grammar, UtteranceLengthWithinRange) {
  const auto g = UtteranceGrammar::standard();
  Rng r(3);
  const ExperimentRecord rec{"tap", "sphere", "small", "fast", {}};
  for (int i = 0; i < 200; ++i) {
    const auto u = g.utter(rec, r);
    const auto n = static_cast<std::size_t>(std::count(u.begin(), u.end(), ' ') + 1);
    EXPECT_GE(n, 5u);
    EXPECT_LE(n, 9u);
  }
}

TEST(GenerateCorpus, SingleRecordInDomain) {
  const auto g = UtteranceGrammar::standard();
  const auto c = generate_corpus(1, WorldTable::standard(), g, GestureParams::standard(), 123);
  ASSERT_EQ(c.records.size(), 1u);
  ASSERT_EQ(c.trajectories.size(), 1u);
  EXPECT_NO_THROW(validate_record(c.records[0]));
  const auto lex = g.words();
  for (const auto& w : c.records[0].words) EXPECT_TRUE(lex.contains(w)) << w;
}

TEST(GenerateCorpus, DeterministicAndSeedSensitive) {
  const auto t = WorldTable::standard();
  const auto g = UtteranceGrammar::standard();
  const auto p = GestureParams::standard();
  const auto a = generate_corpus(20, t, g, p, 9);
  const auto b = generate_corpus(20, t, g, p, 9);
  EXPECT_EQ(a.records, b.records);
  for (std::size_t i = 0; i < 20; ++i) {
    ASSERT_EQ(a.trajectories[i].size(), b.trajectories[i].size());
    for (std::size_t k = 0; k < a.trajectories[i].size(); ++k) {
      EXPECT_EQ(a.trajectories[i].frames()[k].hand, b.trajectories[i].frames()[k].hand);
    }
  }
  const auto c = generate_corpus(20, t, g, p, 10000);
  EXPECT_NE(a.records, c.records);
  EXPECT_EQ(generate_records(20, t, g, 9), a.records);
}

TEST(GenerateCorpus, SeedPlusIndexDerivation) {
  // Record i of seed s equals record 0 of seed s + i.
  const auto t = WorldTable::standard();
  const auto g = UtteranceGrammar::standard();
  const auto a = generate_records(5, t, g, 40);
  for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(generate_records(1, t, g, 40 + i)[0], a[i]);
}

TEST(GenerateCorpus, RequiresPositiveN) {
  EXPECT_THROW(generate_records(0, WorldTable::standard(), UtteranceGrammar::standard(), 1), Error);
}

TEST(GenerateCorpus, LawOfLargeNumbers) {
  const auto t = WorldTable::standard();
  const auto rs = generate_records(10000, t, UtteranceGrammar::standard(), 2718);
  double n = 0, fast = 0;
  for (const auto& r : rs) {
    if (r.action == "tap" && r.shape == "sphere" && r.size == "small") {
      ++n;
      fast += r.objvel == "fast";
    }
  }
  EXPECT_GT(n, 400);
  EXPECT_NEAR(fast / n, t.row("tap", "sphere", "small")[2], 0.02);
}

TEST(GenerateCorpus, LearnedNetworkReproducesTable) {
  const auto t = WorldTable::standard();
  const auto rs = generate_records(50000, t, UtteranceGrammar::standard(), 31337);
  const auto net = learn_cpts(rs, NetworkStructure::standard(build_vocabulary(rs)), 0.0);
  const auto& cpt = net.cpt(vars::kObjVel);
  for (std::size_t a = 0; a < 3; ++a) {
    for (std::size_t s = 0; s < 2; ++s) {
      for (std::size_t z = 0; z < 3; ++z) {
        const auto& truth = t.row(action_domain().value(a), shape_domain().value(s), size_domain().value(z));
        const auto& learned = cpt.rows.at((a * 2 + s) * 3 + z);
        for (std::size_t v = 0; v < 3; ++v) EXPECT_NEAR(learned[v], truth[v], 0.02);
      }
    }
  }
}

double distance(const Vec3& a, const Vec3& b) { return std::hypot(a[0] - b[0], a[1] - b[1], a[2] - b[2]); }

GestureParams noiseless() {
  auto p = GestureParams::standard();
  p.noise_sigma = 0.0;
  p.torso_jitter = 0.0;
  return p;
}

TEST(GenerateTrajectory, BitIdenticalForSameSeed) {
  const auto p = GestureParams::standard();
  for (const auto& a : action_domain().values()) {
    const auto x = generate_trajectory(a, p, 77);
    const auto y = generate_trajectory(a, p, 77);
    ASSERT_EQ(x.size(), y.size());
    for (std::size_t k = 0; k < x.size(); ++k) {
      EXPECT_EQ(x.frames()[k].t, y.frames()[k].t);
      EXPECT_EQ(x.frames()[k].hand, y.frames()[k].hand);
      EXPECT_EQ(x.frames()[k].torso, y.frames()[k].torso);
    }
  }
}

TEST(GenerateTrajectory, TapIsLateral) {
  const auto p = noiseless();
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto tr = generate_trajectory("tap", p, seed);
    const auto& f0 = tr.frames().front().hand;
    double dx = 0, dz = 0;
    for (const auto& f : tr.frames()) {
      dx = std::max(dx, std::abs(f.hand[0] - f0[0]));
      dz = std::max(dz, std::abs(f.hand[2] - f0[2]));
    }
    EXPECT_GT(dx, dz) << seed;
  }
}

TEST(GenerateTrajectory, TouchDwellsNearObject) {
  const auto p = noiseless();
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto g = generate_gesture("touch", p, seed);
    double run_start = -1, longest = 0;
    for (const auto& f : g.trajectory.frames()) {
      if (distance(f.hand, g.object) <= 0.01) {
        if (run_start < 0) run_start = f.t;
        longest = std::max(longest, f.t - run_start);
      } else {
        run_start = -1;
      }
    }
    EXPECT_GE(longest, 0.5) << seed;
  }
}

TEST(GenerateTrajectory, GraspStopsAtObjectThenRises) {
  const auto p = noiseless();
  const auto g = generate_gesture("grasp", p, 4);
  const auto& fr = g.trajectory.frames();
  double closest = 1e9;
  std::size_t at = 0;
  for (std::size_t k = 0; k < fr.size(); ++k) {
    const double d = distance(fr[k].hand, g.object);
    if (d < closest) {
      closest = d;
      at = k;
    }
  }
  EXPECT_LT(closest, 0.01);
  EXPECT_GT(fr.back().hand[2], g.object[2] + 0.1);
  // Approach from above: the frame before reaching the object is higher than it.
  ASSERT_GT(at, 2u);
  EXPECT_GT(fr[at - 2].hand[2], g.object[2]);
}

TEST(GenerateTrajectory, UnknownActionRejected) {
  EXPECT_THROW(generate_trajectory("push", GestureParams::standard(), 1), UnknownLabelError);
}

TEST(GestureParams, Validation) {
  auto p = GestureParams::standard();
  EXPECT_NO_THROW(p.validate());
  p.noise_sigma = -1;
  EXPECT_THROW(p.validate(), Error);
  p = GestureParams::standard();
  p.tap.duration_min = 0;
  EXPECT_THROW(p.validate(), Error);
}

}  // namespace
}  // namespace affgest
