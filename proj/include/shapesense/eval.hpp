#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "shapesense/dataset.hpp"
#include "shapesense/nn/model.hpp"
#include "shapesense/nn/train.hpp"

namespace shapesense::eval {

/// One row of the architecture table used in the capacity study.
struct ArchEntry {
    std::string key;          // "m1" .. "m5"
    nn::ModelSpec spec;
    std::size_t table_size;   // "Size" as printed in the published table
    double table_mse;         // published average MSE (real hardware data)
};

/// The five study architectures, in table order.
const std::vector<ArchEntry>& arch_registry();

/// C16,2 -> C8,2 -> F16 -> F8 (tanh) -> F3 (linear).
nn::ModelSpec reference_spec();

/// "ref", "m1" .. "m5"; throws std::invalid_argument otherwise.
nn::ModelSpec arch_by_name(std::string_view name);

/// Human-readable comparison of computed parameter counts against the
/// published table, flagging every row that disagrees.
std::string param_count_audit();

enum class SplitName { train, val, test, all };
SplitName split_from_string(std::string_view s);
/// `all` needs no split; the others throw MissingSplit when none is set.
std::vector<std::size_t> split_indices(const Dataset& dataset, SplitName which);

struct EvalRow {
    std::size_t index;  // sample index in the dataset
    double kappa_true, kappa_pred;
    double phi_true, phi_pred;
    double abs_err_kappa, abs_err_phi;  // phi error wrapped into [0, pi]
};

struct EvalReport {
    double mse = 0.0;         // normalized target space
    double rmse_kappa = 0.0;  // m^-1, all rows
    double rmse_phi = 0.0;    // rad, all rows
    // Restricted to rows with kappa_true > identifiable_fraction * kappa_max,
    // where the bending plane is observable.
    double rmse_kappa_identifiable = 0.0;
    double rmse_phi_identifiable = 0.0;
    std::size_t n_identifiable = 0;
    std::vector<EvalRow> rows;
};

inline constexpr double kIdentifiableFraction = 0.05;

/// Forward pass over one split. Uses the model's own normalization when it
/// carries one, otherwise the dataset's. Throws MissingSplit / MissingNormalization.
EvalReport evaluate(const nn::Model& model, const Dataset& dataset, SplitName which,
                    double identifiable_fraction = kIdentifiableFraction);

/// `index,kappa_true,kappa_pred,phi_true,phi_pred,abs_err_kappa,abs_err_phi`,
/// at most max_rows data rows, then a '#' summary line.
void write_eval_csv(std::ostream& out, const EvalReport& report,
                    std::size_t max_rows = std::numeric_limits<std::size_t>::max());

struct KFoldConfig {
    int k = 5;
    int epochs = 100;
    std::uint64_t seed = 0;  // fold assignment shuffle
    unsigned threads = 1;    // 0 = hardware concurrency
};

/// Seeded shuffle, then k contiguous folds; the first n % k folds get one extra.
std::vector<std::vector<std::size_t>> kfold_partition(std::size_t n, int k, std::uint64_t seed);

/// Copy of the dataset whose split trains on every fold except held_out,
/// validates on held_out, and whose norm is fitted on the training folds.
Dataset fold_dataset(const Dataset& dataset, const std::vector<std::vector<std::size_t>>& folds,
                     std::size_t held_out);

struct FoldResult {
    double mse;  // held-out fold
    nn::TrainHistory history;
};

/// Trains once per fold (config.epochs replaced by kcfg.epochs). The training
/// seed of fold f is mix_seed(config.seed, f).
std::vector<FoldResult> kfold(const nn::ModelSpec& spec, const Dataset& dataset, const KFoldConfig& kcfg,
                              const nn::TrainConfig& config);

struct CvModelReport {
    std::string key;
    nn::ModelSpec spec;
    std::vector<double> fold_mse;
    double mean_mse = 0.0;
    double std_mse = 0.0;  // population
    std::size_t param_count = 0;
    std::size_t table_size = 0;
    std::vector<nn::TrainHistory> curves;
};

struct CvReport {
    std::vector<CvModelReport> models;
};

struct MeanStd {
    double mean, std;
};
MeanStd mean_std(const std::vector<double>& values);

/// k-fold for every architecture with one shared fold assignment.
CvReport crossval_study(const std::vector<ArchEntry>& registry, const Dataset& dataset, const KFoldConfig& kcfg,
                        const nn::TrainConfig& config);

/// `model,fold,mse` rows, blank line, then `model,mean_mse,std_mse,param_count`.
void write_cv_csv(std::ostream& out, const CvReport& report);

/// `model,fold,epoch,train_mse,val_mse` for every recorded curve.
void write_cv_curves_csv(std::ostream& out, const CvReport& report);

}  // namespace shapesense::eval
