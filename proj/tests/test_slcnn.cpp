#include <gtest/gtest.h>

#include <random>

#include "frdetect/grad_check.hpp"
#include "frdetect/slcnn.hpp"

using namespace frdetect;

namespace {

Tensor random_tensor(Shape shape, std::uint64_t seed, double lo = -1, double hi = 1) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  Tensor t(std::move(shape));
  for (double& v : t.raw()) v = u(rng);
  return t;
}

}  // namespace

TEST(RequiredHcbs, WidthRecurrence) {
  EXPECT_EQ(required_hcbs(46), 4u);
  EXPECT_EQ(required_hcbs(13), 2u);
  EXPECT_EQ(required_hcbs(11), 2u);
  EXPECT_EQ(required_hcbs(10), 2u);
  EXPECT_EQ(required_hcbs(1), 0u);
  EXPECT_EQ(required_hcbs(4), 1u);
}

TEST(RequiredHcbs, StallingWidthsNameTheTerminalWidth) {
  for (std::size_t w : {2u, 3u, 8u, 9u}) {
    try {
      required_hcbs(w);
      FAIL() << w;
    } catch (const Error& e) {
      EXPECT_NE(std::string(e.what()).find("stops at"), std::string::npos);
    }
  }
  // 8 -> 3 stalls at 3; 9 -> 3 as well.
  try {
    required_hcbs(8);
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("stops at 3"), std::string::npos);
  }
}

TEST(WidthTrace, DefaultWidth) {
  EXPECT_EQ(width_trace(46),
            (std::vector<std::size_t>{46, 45, 44, 22, 21, 20, 10, 9, 8, 4, 3, 2, 1}));
}

TEST(Hcb, OutputWidths) {
  std::mt19937_64 rng(1);
  for (auto [w, expect] : {std::pair<std::size_t, std::size_t>{46, 22}, {13, 5}}) {
    HcbBlock b = HcbBlock::make(true, 3, 4);
    for (Tensor* t : b.parameters())
      for (double& v : t->raw()) v = std::uniform_real_distribution<double>(-1, 1)(rng);
    Tensor out = hcb_forward(random_tensor({8, w, 3}, w), b);
    EXPECT_EQ(out.shape(), (Shape{8, expect, 4}));
  }
  EXPECT_THROW(hcb_forward(Tensor({2, 3, 3}), HcbBlock::make(true, 3, 4)), Error);
}

TEST(Slcnn, OutputShapeForDefaultConfig) {
  Slcnn model(46, 100, 8);
  EXPECT_EQ(model.block_count(), 4u);
  std::mt19937_64 rng(2);
  model.stack().initialize(rng);
  Tensor latent = slcnn_forward(model, random_tensor({8, 46, 100}, 3));
  EXPECT_EQ(latent.shape(), (Shape{8, 8}));
}

TEST(Slcnn, FilterDepths) {
  Slcnn model(46, 100, 8);
  const auto& blocks = model.stack().blocks();
  EXPECT_EQ(blocks[0].conv1_weights.shape(), (Shape{8, 2, 100}));
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    if (b > 0) {
      EXPECT_EQ(blocks[b].conv1_weights.shape(), (Shape{8, 2}));
    }
    EXPECT_EQ(blocks[b].conv2_weights.shape(), (Shape{8, 2}));
  }
}

TEST(Slcnn, IncompatibleWidthThrows) {
  EXPECT_THROW(Slcnn(8, 4, 2), Error);
  Slcnn model(13, 4, 2);
  EXPECT_THROW(model.forward(Tensor({3, 46, 4})), Error);
}

TEST(Slcnn, ZeroInputWithZeroBiasesGivesZeroLatents) {
  Slcnn model(46, 5, 8);
  std::mt19937_64 rng(4);
  model.stack().initialize(rng);
  Tensor latent = model.forward(Tensor({8, 46, 5}));
  for (double v : latent.raw()) EXPECT_EQ(v, 0.0);
}

TEST(Slcnn, RowPermutationEquivariance) {
  Slcnn model(13, 3, 4);
  std::mt19937_64 rng(5);
  model.stack().initialize(rng);
  for (int trial = 0; trial < 20; ++trial) {
    Tensor x = random_tensor({5, 13, 3}, 100 + trial);
    std::vector<std::size_t> perm{0, 1, 2, 3, 4};
    std::shuffle(perm.begin() + 1, perm.end(), rng);
    Tensor px(x.shape());
    for (std::size_t r = 0; r < 5; ++r)
      for (std::size_t c = 0; c < 13; ++c)
        for (std::size_t e = 0; e < 3; ++e) px.at(r, c, e) = x.at(perm[r], c, e);
    Tensor a = model.forward(x), b = model.forward(px);
    for (std::size_t r = 0; r < 5; ++r)
      for (std::size_t k = 0; k < 4; ++k) EXPECT_EQ(b.at(r, k), a.at(perm[r], k));
    EXPECT_EQ(model.forward(x), a);
  }
}

TEST(Slcnn, GradientMatchesFiniteDifferences) {
  for (std::size_t width : {10u, 46u}) {
    Slcnn model(width, 4, 2);
    std::mt19937_64 rng(6 + width);
    model.stack().initialize(rng);
    for (Tensor* t : model.stack().parameters())
      for (double& v : t->raw()) v += std::uniform_real_distribution<double>(-0.1, 0.1)(rng);
    Tensor x = random_tensor({3, width, 4}, 9);
    Tensor proj = random_tensor({3, 2}, 10);

    auto loss = [&] {
      Tensor z = model.forward(x);
      double s = 0;
      for (std::size_t i = 0; i < z.size(); ++i) s += z[i] * proj[i];
      return s;
    };
    std::vector<HcbTrace> traces;
    model.forward(x, &traces);
    HcbStack grads = model.stack().zeros_like();
    model.stack().backward(traces, proj, grads, false);

    std::vector<ParamSlot> slots;
    auto ps = model.stack().parameters();
    auto gs = grads.parameters();
    for (std::size_t i = 0; i < ps.size(); ++i) slots.push_back({ps[i]->values(), gs[i]->values()});
    const auto r = grad_check(loss, slots, 400, 3);
    EXPECT_LT(r.max_rel_error, 1e-3) << "width " << width;
  }
}
