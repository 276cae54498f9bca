#include <gtest/gtest.h>

#include <cmath>

#include "shapesense/errors.hpp"
#include "shapesense/nn/layers.hpp"
#include "shapesense/rng.hpp"

using namespace shapesense;
using namespace shapesense::nn;

namespace {

Tensor random_tensor(Shape shape, Rng& rng) {
    Tensor t(std::move(shape));
    for (auto& v : t.data) v = rng.uniform(-1.0, 1.0);
    return t;
}

// Scalar probe L = sum(c * out) so that dL/dout = c.
double probe(const Tensor& out, const Tensor& c) {
    double s = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i) s += out[i] * c[i];
    return s;
}

template <typename Forward>
void expect_grad_matches(Tensor& param, const Tensor& analytic, Forward fwd, const Tensor& c) {
    constexpr double h = 1e-6;
    for (std::size_t i = 0; i < param.size(); ++i) {
        const double keep = param[i];
        param[i] = keep + h;
        const double up = probe(fwd(), c);
        param[i] = keep - h;
        const double down = probe(fwd(), c);
        param[i] = keep;
        const double numeric = (up - down) / (2 * h);
        EXPECT_NEAR(analytic[i], numeric, 1e-4 * std::max(1.0, std::abs(numeric))) << "element " << i;
    }
}

}  // namespace

TEST(Tensor, ShapeChecked) {
    EXPECT_THROW(Tensor({2, 3}, std::vector<double>(5)), ShapeMismatch);
    Tensor t({2, 3}, 1.5);
    EXPECT_EQ(t.size(), 6u);
    EXPECT_EQ(t.rank(), 2u);
    EXPECT_TRUE(t.all_finite());
    t[4] = std::nan("");
    EXPECT_FALSE(t.all_finite());
}

TEST(Activation, Names) {
    EXPECT_EQ(activation_from_string("tanh"), Activation::tanh);
    EXPECT_EQ(to_string(Activation::linear), "linear");
    EXPECT_THROW(activation_from_string("relu"), SchemaError);
}

TEST(Conv2d, OutputShape) {
    Rng rng(1);
    const auto out = conv2d_forward(random_tensor({4, 4, 1}, rng), random_tensor({8, 2, 2, 1}, rng), Tensor({8}),
                                    Activation::tanh);
    EXPECT_EQ(out.shape, (Shape{3, 3, 8}));
}

TEST(Conv2d, IdentityKernel) {
    Rng rng(2);
    const auto in = random_tensor({4, 4, 1}, rng);
    const auto out = conv2d_forward(in, Tensor({1, 1, 1, 1}, 1.0), Tensor({1}), Activation::linear);
    EXPECT_EQ(out.shape, (Shape{4, 4, 1}));
    EXPECT_EQ(out.data, in.data);
}

TEST(Conv2d, WindowSum) {
    const auto out = conv2d_forward(Tensor({4, 4, 1}, 1.0), Tensor({1, 2, 2, 1}, 1.0), Tensor({1}),
                                    Activation::linear);
    for (double v : out.data) EXPECT_EQ(v, 4.0);
}

TEST(Conv2d, MultiChannelLayout) {
    // Channel 1 of the input is picked out by a kernel that only weights channel 1.
    Tensor in({3, 3, 2});
    for (std::size_t i = 0; i < 9; ++i) {
        in[2 * i] = 100.0;
        in[2 * i + 1] = static_cast<double>(i);
    }
    Tensor w({1, 1, 1, 2});
    w[1] = 1.0;
    const auto out = conv2d_forward(in, w, Tensor({1}), Activation::linear);
    for (std::size_t i = 0; i < 9; ++i) EXPECT_EQ(out[i], static_cast<double>(i));
}

TEST(Conv2d, RejectsBadShapes) {
    EXPECT_THROW(conv2d_forward(Tensor({4, 4, 1}), Tensor({1, 2, 2, 2}), Tensor({1}), Activation::tanh),
                 ShapeMismatch);
    EXPECT_THROW(conv2d_forward(Tensor({2, 2, 1}), Tensor({1, 3, 3, 1}), Tensor({1}), Activation::tanh),
                 ShapeMismatch);
}

TEST(Dense, Identity) {
    Tensor w({3, 3});
    for (std::size_t i = 0; i < 3; ++i) w[i * 3 + i] = 1.0;
    const Tensor x({3}, {0.1, -2.0, 7.0});
    EXPECT_EQ(dense_forward(x, w, Tensor({3}), Activation::linear).data, x.data);
}

TEST(Dense, BiasOnly) {
    const auto out = dense_forward(Tensor({5}, 3.0), Tensor({5, 2}), Tensor({2}, {0.3, -0.7}), Activation::tanh);
    EXPECT_DOUBLE_EQ(out[0], std::tanh(0.3));
    EXPECT_DOUBLE_EQ(out[1], std::tanh(-0.7));
}

TEST(Dense, HandArithmetic) {
    const auto out = dense_forward(Tensor({2}, {1.0, 2.0}), Tensor({2, 1}, {1.0, 1.0}), Tensor({1}, {0.5}),
                                   Activation::linear);
    ASSERT_EQ(out.size(), 1u);
    EXPECT_EQ(out[0], 3.5);
}

TEST(Dense, FlattensSpatialInput) {
    const auto out = dense_forward(Tensor({2, 2, 1}, 1.0), Tensor({4, 1}, 1.0), Tensor({1}), Activation::linear);
    EXPECT_EQ(out[0], 4.0);
    EXPECT_THROW(dense_forward(Tensor({3}), Tensor({4, 1}), Tensor({1}), Activation::linear), ShapeMismatch);
}

TEST(Conv2dBackward, MatchesFiniteDifferences) {
    Rng rng(8);
    for (auto act : {Activation::tanh, Activation::linear}) {
        auto in = random_tensor({4, 4, 2}, rng);
        auto w = random_tensor({3, 2, 2, 2}, rng);
        auto b = random_tensor({3}, rng);
        const auto out = conv2d_forward(in, w, b, act);
        const auto c = random_tensor(out.shape, rng);
        Tensor gw(w.shape), gb(b.shape);
        const auto gin = conv2d_backward(in, w, act, out, c, gw, gb);
        auto fwd = [&] { return conv2d_forward(in, w, b, act); };
        expect_grad_matches(w, gw, fwd, c);
        expect_grad_matches(b, gb, fwd, c);
        expect_grad_matches(in, gin, fwd, c);
    }
}

TEST(DenseBackward, MatchesFiniteDifferences) {
    Rng rng(9);
    for (auto act : {Activation::tanh, Activation::linear}) {
        auto in = random_tensor({6}, rng);
        auto w = random_tensor({6, 4}, rng);
        auto b = random_tensor({4}, rng);
        const auto out = dense_forward(in, w, b, act);
        const auto c = random_tensor(out.shape, rng);
        Tensor gw(w.shape), gb(b.shape);
        const auto gin = dense_backward(in, w, act, out, c, gw, gb);
        auto fwd = [&] { return dense_forward(in, w, b, act); };
        expect_grad_matches(w, gw, fwd, c);
        expect_grad_matches(b, gb, fwd, c);
        expect_grad_matches(in, gin, fwd, c);
    }
}

TEST(Backward, AccumulatesAndSkipsInputGrad) {
    Rng rng(10);
    const auto in = random_tensor({3}, rng);
    const auto w = random_tensor({3, 2}, rng);
    const auto out = dense_forward(in, w, Tensor({2}), Activation::linear);
    const Tensor c({2}, 1.0);
    Tensor gw(w.shape), gb({2});
    dense_backward(in, w, Activation::linear, out, c, gw, gb);
    const auto once = gw;
    const auto gin = dense_backward(in, w, Activation::linear, out, c, gw, gb, false);
    EXPECT_EQ(gin.size(), 0u);
    for (std::size_t i = 0; i < gw.size(); ++i) EXPECT_DOUBLE_EQ(gw[i], 2 * once[i]);
    EXPECT_EQ(gb[0], 2.0);
}
