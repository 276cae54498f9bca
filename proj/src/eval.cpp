#include "shapesense/eval.hpp"

#include <atomic>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "shapesense/errors.hpp"
#include "shapesense/rng.hpp"

namespace shapesense::eval {

using nn::Activation;
using nn::LayerSpec;
using nn::ModelSpec;

namespace {

ModelSpec make_spec(std::string name, std::vector<LayerSpec> hidden) {
    hidden.push_back(LayerSpec::dense(3, Activation::linear));
    ModelSpec s;
    s.name = std::move(name);
    s.layers = std::move(hidden);
    return s;
}

}  // namespace

const std::vector<ArchEntry>& arch_registry() {
    static const std::vector<ArchEntry> registry = [] {
        const auto C = [](int k, int s) { return LayerSpec::conv(k, s); };
        const auto F = [](int u) { return LayerSpec::dense(u); };
        return std::vector<ArchEntry>{
            {"m1", make_spec("m1", {F(16)}), 306, 0.21},
            {"m2", make_spec("m2", {C(8, 2)}), 186, 0.28},
            {"m3", make_spec("m3", {C(8, 2), C(4, 2)}), 206, 0.26},
            {"m4", make_spec("m4", {C(16, 2), C(8, 2)}), 666, 0.16},
            {"m5", make_spec("m5", {C(32, 2), C(16, 2), F(8)}), 2762, 0.04},
        };
    }();
    return registry;
}

ModelSpec reference_spec() {
    return make_spec("ref", {LayerSpec::conv(16, 2), LayerSpec::conv(8, 2), LayerSpec::dense(16),
                             LayerSpec::dense(8)});
}

ModelSpec arch_by_name(std::string_view name) {
    if (name == "ref") return reference_spec();
    for (const auto& e : arch_registry())
        if (e.key == name) return e.spec;
    throw std::invalid_argument("unknown architecture '" + std::string(name) + "' (expected ref, m1..m5)");
}

std::string param_count_audit() {
    std::ostringstream out;
    out << std::left << std::setw(7) << "model" << std::setw(28) << "layers" << std::setw(10) << "computed"
        << std::setw(7) << "table" << "status\n";
    std::size_t lo = SIZE_MAX, hi = 0;
    for (const auto& e : arch_registry()) {
        const auto n = nn::param_count(e.spec);
        lo = std::min(lo, n);
        hi = std::max(hi, n);
        out << std::setw(7) << e.key << std::setw(28) << e.spec.describe() << std::setw(10) << n << std::setw(7)
            << e.table_size << (n == e.table_size ? "match" : "DIFFERS from table") << '\n';
    }
    out << "computed range " << lo << ".." << hi << " vs quoted range 259..2515"
        << (lo == 259 && hi == 2515 ? "" : " (upper bound DIFFERS)") << '\n';
    return out.str();
}

SplitName split_from_string(std::string_view s) {
    if (s == "train") return SplitName::train;
    if (s == "val") return SplitName::val;
    if (s == "test") return SplitName::test;
    if (s == "all") return SplitName::all;
    throw std::invalid_argument("unknown split '" + std::string(s) + "' (expected train, val, test, all)");
}

std::vector<std::size_t> split_indices(const Dataset& dataset, SplitName which) {
    if (which == SplitName::all) {
        std::vector<std::size_t> all(dataset.size());
        for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
        return all;
    }
    if (!dataset.split) throw MissingSplit();
    switch (which) {
        case SplitName::train: return dataset.split->train;
        case SplitName::val: return dataset.split->val;
        case SplitName::test: return dataset.split->test;
        case SplitName::all: break;
    }
    throw std::logic_error("unreachable");
}

EvalReport evaluate(const nn::Model& model, const Dataset& dataset, SplitName which,
                    double identifiable_fraction) {
    const auto indices = split_indices(dataset, which);
    const NormStats* norm = model.norm ? &*model.norm : dataset.norm ? &*dataset.norm : nullptr;
    if (norm == nullptr) throw MissingNormalization();

    const double kappa_floor = identifiable_fraction * dataset.kappa_max();
    EvalReport r;
    double sq_k = 0.0, sq_p = 0.0, sq_k_id = 0.0, sq_p_id = 0.0, sq_t = 0.0;
    for (auto i : indices) {
        const auto& s = dataset.samples.at(i);
        const auto pred = nn::forward(model, apply_normalization(s.frame, *norm));
        if (pred.size() != 3) throw ShapeMismatch("model output width does not match target");
        const auto target = encode_target(s.label);
        for (int j = 0; j < 3; ++j) sq_t += (pred[j] - target[j]) * (pred[j] - target[j]);

        const auto d = decode_target({pred[0], pred[1], pred[2]}, dataset.length);
        EvalRow row{i, s.label.kappa, d.kappa, s.label.phi, d.phi, 0.0, 0.0};
        row.abs_err_kappa = std::abs(d.kappa - s.label.kappa);
        row.abs_err_phi = std::abs(wrap_angle(d.phi - s.label.phi));
        sq_k += row.abs_err_kappa * row.abs_err_kappa;
        sq_p += row.abs_err_phi * row.abs_err_phi;
        if (s.label.kappa > kappa_floor) {
            ++r.n_identifiable;
            sq_k_id += row.abs_err_kappa * row.abs_err_kappa;
            sq_p_id += row.abs_err_phi * row.abs_err_phi;
        }
        r.rows.push_back(row);
    }
    if (!r.rows.empty()) {
        const double n = static_cast<double>(r.rows.size());
        r.mse = sq_t / n;
        r.rmse_kappa = std::sqrt(sq_k / n);
        r.rmse_phi = std::sqrt(sq_p / n);
    }
    if (r.n_identifiable > 0) {
        const double n = static_cast<double>(r.n_identifiable);
        r.rmse_kappa_identifiable = std::sqrt(sq_k_id / n);
        r.rmse_phi_identifiable = std::sqrt(sq_p_id / n);
    }
    return r;
}

void write_eval_csv(std::ostream& out, const EvalReport& report, std::size_t max_rows) {
    out << "index,kappa_true,kappa_pred,phi_true,phi_pred,abs_err_kappa,abs_err_phi\n";
    std::size_t written = 0;
    for (const auto& r : report.rows) {
        if (written++ == max_rows) break;
        out << r.index << ',' << format_real(r.kappa_true) << ',' << format_real(r.kappa_pred) << ','
            << format_real(r.phi_true) << ',' << format_real(r.phi_pred) << ',' << format_real(r.abs_err_kappa)
            << ',' << format_real(r.abs_err_phi) << '\n';
    }
    out << "# summary: n=" << report.rows.size() << " mse=" << format_real(report.mse)
        << " rmse_kappa=" << format_real(report.rmse_kappa) << " rmse_phi=" << format_real(report.rmse_phi)
        << " n_identifiable=" << report.n_identifiable
        << " rmse_kappa_identifiable=" << format_real(report.rmse_kappa_identifiable)
        << " rmse_phi_identifiable=" << format_real(report.rmse_phi_identifiable) << '\n';
}

std::vector<std::vector<std::size_t>> kfold_partition(std::size_t n, int k, std::uint64_t seed) {
    if (k < 2) throw std::invalid_argument("k must be at least 2");
    if (n < static_cast<std::size_t>(k)) throw std::invalid_argument("dataset smaller than fold count");
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    Rng rng(seed);
    rng.shuffle(std::span<std::size_t>(order));

    const auto kk = static_cast<std::size_t>(k);
    std::vector<std::vector<std::size_t>> folds(kk);
    std::size_t start = 0;
    for (std::size_t f = 0; f < kk; ++f) {
        const std::size_t len = n / kk + (f < n % kk ? 1 : 0);
        folds[f].assign(order.begin() + start, order.begin() + start + len);
        start += len;
    }
    return folds;
}

Dataset fold_dataset(const Dataset& dataset, const std::vector<std::vector<std::size_t>>& folds,
                     std::size_t held_out) {
    Dataset d;
    d.samples = dataset.samples;
    d.length = dataset.length;
    SplitIndices s;
    for (std::size_t f = 0; f < folds.size(); ++f) {
        auto& dst = f == held_out ? s.val : s.train;
        dst.insert(dst.end(), folds[f].begin(), folds[f].end());
    }
    d.norm = fit_normalization(d.samples, s.train);
    d.split = std::move(s);
    return d;
}

namespace {

// Runs jobs [0, count) on up to `threads` workers; results land by index.
template <typename Fn>
void run_jobs(std::size_t count, unsigned threads, Fn&& job) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, count));
    if (threads <= 1) {
        for (std::size_t i = 0; i < count; ++i) job(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::atomic<bool> failed{false};
    {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < threads; ++t)
            pool.emplace_back([&] {
                for (std::size_t i; (i = next++) < count && !failed;) {
                    try {
                        job(i);
                    } catch (...) {
                        if (!failed.exchange(true)) failure = std::current_exception();
                    }
                }
            });
    }
    if (failure) std::rethrow_exception(failure);
}

FoldResult run_fold(const nn::ModelSpec& spec, const Dataset& dataset,
                    const std::vector<std::vector<std::size_t>>& folds, std::size_t f, int epochs,
                    const nn::TrainConfig& config) {
    const Dataset fd = fold_dataset(dataset, folds, f);
    nn::TrainConfig cfg = config;
    cfg.epochs = epochs;
    cfg.seed = mix_seed(config.seed, f);
    auto trained = nn::train(spec, fd, cfg);
    const double mse = nn::batch_mse(trained.model, nn::make_batch(fd, *fd.norm, fd.split->val));
    return {mse, std::move(trained.history)};
}

}  // namespace

std::vector<FoldResult> kfold(const nn::ModelSpec& spec, const Dataset& dataset, const KFoldConfig& kcfg,
                              const nn::TrainConfig& config) {
    const auto folds = kfold_partition(dataset.size(), kcfg.k, kcfg.seed);
    std::vector<FoldResult> results(folds.size());
    run_jobs(folds.size(), kcfg.threads,
             [&](std::size_t f) { results[f] = run_fold(spec, dataset, folds, f, kcfg.epochs, config); });
    return results;
}

MeanStd mean_std(const std::vector<double>& values) {
    if (values.empty()) return {0.0, 0.0};
    double sum = 0.0;
    for (double v : values) sum += v;
    const double mean = sum / static_cast<double>(values.size());
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    return {mean, std::sqrt(ss / static_cast<double>(values.size()))};
}

CvReport crossval_study(const std::vector<ArchEntry>& registry, const Dataset& dataset, const KFoldConfig& kcfg,
                        const nn::TrainConfig& config) {
    const auto folds = kfold_partition(dataset.size(), kcfg.k, kcfg.seed);
    const std::size_t k = folds.size();

    std::vector<FoldResult> results(registry.size() * k);
    run_jobs(results.size(), kcfg.threads, [&](std::size_t job) {
        results[job] = run_fold(registry[job / k].spec, dataset, folds, job % k, kcfg.epochs, config);
    });

    CvReport report;
    for (std::size_t m = 0; m < registry.size(); ++m) {
        CvModelReport r;
        r.key = registry[m].key;
        r.spec = registry[m].spec;
        r.param_count = nn::param_count(r.spec);
        r.table_size = registry[m].table_size;
        for (std::size_t f = 0; f < k; ++f) {
            r.fold_mse.push_back(results[m * k + f].mse);
            r.curves.push_back(std::move(results[m * k + f].history));
        }
        const auto ms = mean_std(r.fold_mse);
        r.mean_mse = ms.mean;
        r.std_mse = ms.std;
        report.models.push_back(std::move(r));
    }
    return report;
}

void write_cv_csv(std::ostream& out, const CvReport& report) {
    out << "model,fold,mse\n";
    for (const auto& m : report.models)
        for (std::size_t f = 0; f < m.fold_mse.size(); ++f)
            out << m.key << ',' << f + 1 << ',' << format_real(m.fold_mse[f]) << '\n';
    out << "\nmodel,mean_mse,std_mse,param_count\n";
    for (const auto& m : report.models)
        out << m.key << ',' << format_real(m.mean_mse) << ',' << format_real(m.std_mse) << ',' << m.param_count
            << '\n';
}

void write_cv_curves_csv(std::ostream& out, const CvReport& report) {
    out << "model,fold,epoch,train_mse,val_mse\n";
    for (const auto& m : report.models)
        for (std::size_t f = 0; f < m.curves.size(); ++f) {
            const auto& h = m.curves[f];
            for (std::size_t e = 0; e < h.train_mse.size(); ++e)
                out << m.key << ',' << f + 1 << ',' << e + 1 << ',' << format_real(h.train_mse[e]) << ','
                    << format_real(h.val_mse[e]) << '\n';
        }
}

}  // namespace shapesense::eval
