#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "shapesense/errors.hpp"
#include "shapesense/eval.hpp"

using namespace shapesense;
using namespace shapesense::eval;

namespace {

// F3(linear) with zero weights: the output is the bias whatever the input.
nn::Model constant_model(const TargetVector& value) {
    nn::ModelSpec spec;
    spec.name = "const";
    spec.layers = {nn::LayerSpec::dense(3, nn::Activation::linear)};
    auto m = nn::Model::zeros(spec);
    for (std::size_t j = 0; j < 3; ++j) m.params[1][j] = value[j];
    return m;
}

Dataset prepared(int n_kappa, int n_phi) {
    auto d = split(generate(n_kappa, n_phi, SensorModelConfig{}), 42);
    d.norm = fit_normalization(d);
    return d;
}

std::size_t count_lines(const std::string& s) {
    std::size_t n = 0;
    for (char c : s) n += c == '\n';
    return n;
}

}  // namespace

TEST(Registry, Architectures) {
    const auto& r = arch_registry();
    ASSERT_EQ(r.size(), 5u);
    EXPECT_EQ(r[0].key, "m1");
    EXPECT_EQ(r[4].table_size, 2762u);
    EXPECT_DOUBLE_EQ(r[4].table_mse, 0.04);
    for (const auto& e : r) EXPECT_EQ(e.spec.output_dim(), 3u);
    EXPECT_THROW(arch_by_name("m6"), std::invalid_argument);
}

TEST(Registry, AuditFlagsTableDivergence) {
    const auto text = param_count_audit();
    EXPECT_NE(text.find("259"), std::string::npos);
    EXPECT_NE(text.find("2771"), std::string::npos);
    std::size_t flagged = 0;
    for (auto pos = text.find("DIFFERS from table"); pos != std::string::npos;
         pos = text.find("DIFFERS from table", pos + 1))
        ++flagged;
    EXPECT_EQ(flagged, 5u);
    EXPECT_NE(text.find("2515"), std::string::npos);
    EXPECT_NE(text.find("upper bound DIFFERS"), std::string::npos);
}

TEST(SplitSelection, Names) {
    EXPECT_EQ(split_from_string("val"), SplitName::val);
    EXPECT_THROW(split_from_string("dev"), std::invalid_argument);
    Dataset d;
    d.samples.resize(5);
    EXPECT_EQ(split_indices(d, SplitName::all).size(), 5u);
    EXPECT_THROW(split_indices(d, SplitName::test), MissingSplit);
}

TEST(Evaluate, PerfectPredictionScoresZero) {
    Dataset d;
    d.samples.assign(6, Sample{SensorFrame{}, CurvatureState::make(0.0, 0.0)});
    d.norm = NormStats{};
    d.norm->sigma.fill(1.0);
    const auto r = evaluate(constant_model(encode_target(CurvatureState::make(0.0, 0.0))), d, SplitName::all);
    EXPECT_EQ(r.mse, 0.0);
    EXPECT_EQ(r.rmse_kappa, 0.0);
    EXPECT_EQ(r.rmse_phi, 0.0);
    EXPECT_EQ(r.n_identifiable, 0u);
}

TEST(Evaluate, ConstantPredictorAlgebra) {
    const auto d = prepared(10, 10);
    const auto& test = d.split->test;
    const auto& trn = d.split->train;

    TargetVector mean_train{}, mean_test{};
    for (auto i : trn)
        for (int j = 0; j < 3; ++j) mean_train[j] += encode_target(d.samples[i].label)[j] / trn.size();
    for (auto i : test)
        for (int j = 0; j < 3; ++j) mean_test[j] += encode_target(d.samples[i].label)[j] / test.size();
    double variance = 0.0;
    for (auto i : test) {
        const auto t = encode_target(d.samples[i].label);
        for (int j = 0; j < 3; ++j) variance += (t[j] - mean_test[j]) * (t[j] - mean_test[j]) / test.size();
    }

    // Predicting the test mean leaves exactly the summed target variance.
    EXPECT_NEAR(evaluate(constant_model(mean_test), d, SplitName::test).mse, variance, 1e-12);
    // Predicting the training mean adds the squared offset between the means.
    double offset = 0.0;
    for (int j = 0; j < 3; ++j) offset += (mean_train[j] - mean_test[j]) * (mean_train[j] - mean_test[j]);
    EXPECT_NEAR(evaluate(constant_model(mean_train), d, SplitName::test).mse, variance + offset, 1e-12);
}

TEST(Evaluate, RowsAndIdentifiableSubset) {
    const auto d = prepared(10, 10);
    const auto r = evaluate(constant_model({0.5, 1.0, 0.0}), d, SplitName::test);
    ASSERT_EQ(r.rows.size(), d.split->test.size());
    std::size_t id = 0;
    double sq = 0.0;
    for (const auto& row : r.rows) {
        EXPECT_DOUBLE_EQ(row.kappa_pred, 0.5 * d.kappa_max());
        EXPECT_LE(row.abs_err_phi, std::numbers::pi);
        if (row.kappa_true > kIdentifiableFraction * d.kappa_max()) {
            ++id;
            sq += row.abs_err_phi * row.abs_err_phi;
        }
    }
    EXPECT_EQ(r.n_identifiable, id);
    EXPECT_NEAR(r.rmse_phi_identifiable, std::sqrt(sq / id), 1e-12);
}

TEST(Evaluate, NeedsNormalization) {
    auto d = split(generate(4, 4, SensorModelConfig{}), 1);
    EXPECT_THROW(evaluate(constant_model({0, 1, 0}), d, SplitName::test), MissingNormalization);
}

TEST(EvalCsv, RowLimitAndSummary) {
    const auto d = prepared(10, 10);
    const auto r = evaluate(constant_model({0.5, 1.0, 0.0}), d, SplitName::all);
    std::ostringstream out;
    write_eval_csv(out, r, 7);
    EXPECT_EQ(count_lines(out.str()), 1u + 7 + 1);
    EXPECT_NE(out.str().find("# summary: n=100"), std::string::npos);
}

TEST(KFold, PartitionSizes) {
    const auto folds = kfold_partition(1330, 5, 0);
    std::set<std::size_t> seen;
    for (const auto& f : folds) {
        EXPECT_EQ(f.size(), 266u);
        seen.insert(f.begin(), f.end());
    }
    EXPECT_EQ(seen.size(), 1330u);

    const auto uneven = kfold_partition(13, 5, 7);
    const std::size_t expected[] = {3, 3, 3, 2, 2};
    for (int f = 0; f < 5; ++f) EXPECT_EQ(uneven[f].size(), expected[f]);
    EXPECT_THROW(kfold_partition(3, 5, 0), std::invalid_argument);
    EXPECT_THROW(kfold_partition(10, 1, 0), std::invalid_argument);
}

TEST(KFold, FoldDatasetNormUsesTrainingFolds) {
    const auto d = generate(6, 6, SensorModelConfig{});
    const auto folds = kfold_partition(d.size(), 3, 1);
    const auto fd = fold_dataset(d, folds, 1);
    EXPECT_EQ(fd.split->val, folds[1]);
    EXPECT_EQ(fd.split->train.size(), folds[0].size() + folds[2].size());
    EXPECT_TRUE(fd.split->test.empty());
    const auto expected = fit_normalization(d.samples, fd.split->train);
    EXPECT_EQ(fd.norm->mu, expected.mu);
}

TEST(KFold, MinimalConfiguration) {
    auto d = generate(2, 2, SensorModelConfig{});
    nn::ModelSpec smallest;
    smallest.name = "head";
    smallest.layers = {nn::LayerSpec::dense(3, nn::Activation::linear)};
    nn::TrainConfig cfg;
    const auto results = kfold(smallest, d, KFoldConfig{2, 3, 0, 1}, cfg);
    ASSERT_EQ(results.size(), 2u);
    for (const auto& r : results) {
        EXPECT_TRUE(std::isfinite(r.mse));
        EXPECT_EQ(r.history.train_mse.size(), 3u);
    }
}

TEST(MeanStd, Population) {
    const auto ms = mean_std({1.0, 3.0});
    EXPECT_EQ(ms.mean, 2.0);
    EXPECT_EQ(ms.std, 1.0);
}

TEST(CrossVal, DeterministicAndThreadIndependent) {
    const auto d = generate(6, 5, SensorModelConfig{});
    nn::TrainConfig cfg;
    cfg.seed = 5;
    const KFoldConfig serial{5, 2, 3, 1};
    const KFoldConfig pooled{5, 2, 3, 4};
    const auto a = crossval_study(arch_registry(), d, serial, cfg);
    const auto b = crossval_study(arch_registry(), d, pooled, cfg);
    std::ostringstream sa, sb;
    write_cv_csv(sa, a);
    write_cv_csv(sb, b);
    EXPECT_EQ(sa.str(), sb.str());
    EXPECT_EQ(count_lines(sa.str()), 1u + 25 + 1 + 1 + 5);

    std::ostringstream curves;
    write_cv_curves_csv(curves, a);
    EXPECT_EQ(count_lines(curves.str()), 1u + 25 * 2);
    EXPECT_EQ(a.models[4].param_count, 2771u);
}
