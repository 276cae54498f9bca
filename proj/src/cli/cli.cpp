#include "shapesense/cli.hpp"

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "shapesense/dataset.hpp"
#include "shapesense/errors.hpp"
#include "shapesense/eval.hpp"
#include "shapesense/nn/model_io.hpp"
#include "shapesense/nn/train.hpp"

namespace shapesense::cli {

namespace fs = std::filesystem;

namespace {

/// Merged settings: config file first, then flags on top.
struct RunConfig {
    SensorModelConfig sensor;
    int n_kappa = 35;
    int n_phi = 38;
    double length = kDefaultLength;

    nn::TrainConfig train;
    std::string arch = "ref";

    int folds = 5;
    int cv_epochs = 100;
    unsigned threads = 1;

    std::string split = "test";
    std::size_t first = 0;  // 0 = all rows
    bool strict = false;

    std::uint64_t seed = 42;
    std::string data, in, out, model, history, curves;
};

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void apply_config_file(const std::string& path, RunConfig& c) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot read config file " + path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(f);
    } catch (const nlohmann::json::exception& e) {
        throw UsageError("config file " + path + " is not valid JSON: " + e.what());
    }
    if (!j.is_object()) throw UsageError("config file must hold a JSON object");
    try {
        for (const auto& [key, v] : j.items()) {
            if (key == "r0") c.sensor.r0 = v.get<double>();
            else if (key == "alpha") c.sensor.alpha = v.get<double>();
            else if (key == "p_scale") c.sensor.p_scale = v.get<double>();
            else if (key == "sat_pressure") c.sensor.sat_pressure = v.get<double>();
            else if (key == "noise_sigma") c.sensor.noise_sigma = v.get<double>();
            else if (key == "vref") c.sensor.vref = v.get<double>();
            else if (key == "n_kappa") c.n_kappa = v.get<int>();
            else if (key == "n_phi") c.n_phi = v.get<int>();
            else if (key == "length") c.length = v.get<double>();
            else if (key == "lr") c.train.lr = v.get<double>();
            else if (key == "batch_size") c.train.batch_size = v.get<int>();
            else if (key == "epochs") c.train.epochs = v.get<int>();
            else if (key == "beta1") c.train.beta1 = v.get<double>();
            else if (key == "beta2") c.train.beta2 = v.get<double>();
            else if (key == "eps_adam") c.train.eps_adam = v.get<double>();
            else if (key == "shuffle") c.train.shuffle = v.get<bool>();
            else if (key == "lr_schedule") c.train.schedule = nn::schedule_from_string(v.get<std::string>());
            else if (key == "final_lr_fraction") c.train.final_lr_fraction = v.get<double>();
            else if (key == "arch") c.arch = v.get<std::string>();
            else if (key == "folds") c.folds = v.get<int>();
            else if (key == "cv_epochs") c.cv_epochs = v.get<int>();
            else if (key == "threads") c.threads = v.get<unsigned>();
            else if (key == "split") c.split = v.get<std::string>();
            else if (key == "first") c.first = v.get<std::size_t>();
            else if (key == "strict") c.strict = v.get<bool>();
            else if (key == "seed") c.seed = v.get<std::uint64_t>();
            else if (key == "data") c.data = v.get<std::string>();
            else if (key == "in") c.in = v.get<std::string>();
            else if (key == "out") c.out = v.get<std::string>();
            else if (key == "model") c.model = v.get<std::string>();
            else if (key == "history") c.history = v.get<std::string>();
            else if (key == "curves") c.curves = v.get<std::string>();
            else throw UsageError("unknown config key '" + key + "'");
        }
    } catch (const nlohmann::json::exception& e) {
        throw UsageError("config file " + path + ": " + e.what());
    }
}

// ---- file helpers ------------------------------------------------------------

void require_readable(const std::string& path, const char* what) {
    if (path.empty()) throw UsageError(std::string("missing --") + what);
    std::ifstream f(path);
    if (!f) throw IoError("cannot read " + path);
}

void require_writable(const std::string& path, const char* what) {
    if (path.empty()) throw UsageError(std::string("missing --") + what);
    const fs::path p(path);
    const fs::path dir = p.has_parent_path() ? p.parent_path() : fs::path(".");
    std::error_code ec;
    if (!fs::is_directory(dir, ec)) throw IoError("output directory does not exist: " + dir.string());
    if (::access(dir.c_str(), W_OK) != 0) throw IoError("output directory is not writable: " + dir.string());
    if (fs::is_directory(p, ec)) throw IoError("output path is a directory: " + path);
}

// Writes to a sibling temporary and renames, so readers never see a partial file.
void write_atomic(const std::string& path, const std::string& content) {
    const fs::path target(path);
    fs::path tmp = target;
    tmp += ".tmp." + std::to_string(::getpid());
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw IoError("cannot write " + tmp.string());
        f << content;
        f.flush();
        if (!f) {
            f.close();
            std::error_code ec;
            fs::remove(tmp, ec);
            throw IoError("write failed for " + path);
        }
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw IoError("cannot move output into place: " + path);
    }
}

std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot read " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

Dataset load_dataset(const std::string& path, double length) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot read " + path);
    Dataset ds;
    ds.length = length;
    ds.samples = read_dataset_csv(f, /*strict=*/true, length).samples;
    if (ds.samples.empty()) throw ParseError(0, "no records in " + path);
    return ds;
}

// ---- commands ----------------------------------------------------------------

void cmd_generate(const RunConfig& c, std::ostream& out) {
    require_writable(c.out, "out");
    SensorModelConfig sensor = c.sensor;
    sensor.seed = c.seed;
    const Dataset ds = generate(c.n_kappa, c.n_phi, sensor, c.length);
    std::ostringstream csv;
    write_dataset_csv(csv, ds.samples);
    write_atomic(c.out, csv.str());
    out << "wrote " << ds.size() << " samples to " << c.out << "\n"
        << "workspace: kappa in [0, " << format_real(ds.kappa_max()) << "] 1/m (L = " << format_real(c.length)
        << " m, bend <= pi/2), phi in (-pi, pi]\n";
}

int cmd_ingest(const RunConfig& c, std::ostream& out, std::ostream& err) {
    require_readable(c.in, "in");
    require_writable(c.out, "out");
    std::ifstream f(c.in);
    CsvReadResult r;
    try {
        r = read_dataset_csv(f, c.strict, c.length);
    } catch (const ParseError& e) {
        err << "error: " << c.in << ": " << e.what() << "\n";
        return kData;
    }
    for (const auto& bad : r.errors) err << c.in << ":" << bad.line_number << ": " << bad.message << "\n";
    std::ostringstream csv;
    write_dataset_csv(csv, r.samples);
    write_atomic(c.out, csv.str());
    if (!r.errors.empty())
        err << "warning: skipped " << r.errors.size() << (r.errors.size() == 1 ? " line" : " lines") << "\n";
    out << "wrote " << r.samples.size() << " records to " << c.out << "\n";
    return kOk;
}

void cmd_train(const RunConfig& c, std::ostream& out) {
    require_readable(c.data, "data");
    require_writable(c.out, "out");
    if (!c.history.empty()) require_writable(c.history, "history");
    const auto spec = eval::arch_by_name(c.arch);
    c.train.validate();

    Dataset ds = split(load_dataset(c.data, c.length), c.seed);
    ds.norm = fit_normalization(ds);
    nn::TrainConfig tc = c.train;
    tc.seed = c.seed;
    const auto result = nn::train(spec, ds, tc);

    write_atomic(c.out, nn::model_to_json(result.model));
    if (!c.history.empty()) {
        std::ostringstream h;
        h << "epoch,train_mse,val_mse\n";
        for (std::size_t e = 0; e < result.history.train_mse.size(); ++e)
            h << e + 1 << ',' << format_real(result.history.train_mse[e]) << ','
              << format_real(result.history.val_mse[e]) << '\n';
        write_atomic(c.history, h.str());
    }
    out << "trained " << c.arch << " (" << spec.describe() << ", " << result.model.param_count()
        << " parameters) for " << tc.epochs << " epochs\n"
        << "final train_mse=" << format_real(result.history.train_mse.back())
        << " val_mse=" << format_real(result.history.val_mse.back()) << "\n";
}

void cmd_eval(const RunConfig& c, std::ostream& out) {
    require_readable(c.model, "model");
    require_readable(c.data, "data");
    require_writable(c.out, "out");
    const auto which = eval::split_from_string(c.split);
    const auto model = nn::model_from_json(read_file(c.model));
    if (!model.norm) throw SchemaError("model file carries no normalization statistics");
    if (model.spec.output_dim() != 3) throw SchemaError("model output is not a 3-component target");

    Dataset ds = load_dataset(c.data, c.length);
    if (which != eval::SplitName::all) ds = split(std::move(ds), c.seed);
    const auto report = eval::evaluate(model, ds, which);

    std::ostringstream csv;
    eval::write_eval_csv(csv, report, c.first == 0 ? report.rows.size() : c.first);
    write_atomic(c.out, csv.str());
    out << "evaluated " << report.rows.size() << " " << c.split << " samples: mse=" << format_real(report.mse)
        << " rmse_kappa=" << format_real(report.rmse_kappa) << " 1/m"
        << " rmse_phi(kappa>" << eval::kIdentifiableFraction << "*kappa_max)="
        << format_real(report.rmse_phi_identifiable) << " rad\n";
}

void cmd_crossval(const RunConfig& c, std::ostream& out) {
    require_readable(c.data, "data");
    require_writable(c.out, "out");
    if (!c.curves.empty()) require_writable(c.curves, "curves");
    nn::TrainConfig tc = c.train;
    tc.epochs = c.cv_epochs;
    tc.seed = c.seed;
    tc.validate();

    const Dataset ds = load_dataset(c.data, c.length);
    eval::KFoldConfig kc;
    kc.k = c.folds;
    kc.epochs = c.cv_epochs;
    kc.seed = c.seed;
    kc.threads = c.threads;
    const auto report = eval::crossval_study(eval::arch_registry(), ds, kc, tc);

    std::ostringstream csv;
    eval::write_cv_csv(csv, report);
    write_atomic(c.out, csv.str());
    if (!c.curves.empty()) {
        std::ostringstream curves;
        eval::write_cv_curves_csv(curves, report);
        write_atomic(c.curves, curves.str());
    }
    out << eval::param_count_audit();
    out << "model  mean_mse      std_mse\n";
    for (const auto& m : report.models)
        out << m.key << "     " << format_real(m.mean_mse) << "  " << format_real(m.std_mse) << "\n";
}

std::optional<std::string> find_config_path(const std::vector<std::string>& args) {
    for (std::size_t i = 1; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) return args[i + 1];
        if (args[i].starts_with("--config=")) return args[i].substr(9);
    }
    return std::nullopt;
}

void add_sensor_flags(CLI::App* app, RunConfig& c) {
    app->add_option("--r0", c.sensor.r0, "Unloaded resistance (ohm)");
    app->add_option("--alpha", c.sensor.alpha, "Pressure sensitivity (1/Pa)");
    app->add_option("--p-scale", c.sensor.p_scale, "Pressure per unit curvature (Pa*m)");
    app->add_option("--sat-pressure", c.sensor.sat_pressure, "Saturation pressure (Pa)");
    app->add_option("--noise-sigma", c.sensor.noise_sigma, "Gaussian noise on normalized bridge voltage");
    app->add_option("--vref", c.sensor.vref, "Bridge excitation (V)");
}

void add_train_flags(CLI::App* app, RunConfig& c, int& epochs) {
    app->add_option("--lr", c.train.lr, "Adam learning rate");
    app->add_option("--batch-size", c.train.batch_size, "Mini-batch size");
    app->add_option("--epochs", epochs, "Training epochs");
    app->add_option("--beta1", c.train.beta1, "Adam first-moment decay");
    app->add_option("--beta2", c.train.beta2, "Adam second-moment decay");
    app->add_option("--eps-adam", c.train.eps_adam, "Adam epsilon");
    app->add_flag("--shuffle,!--no-shuffle", c.train.shuffle, "Reshuffle training samples every epoch");
    app->add_option_function<std::string>(
           "--lr-schedule", [&c](const std::string& s) { c.train.schedule = nn::schedule_from_string(s); },
           "Per-epoch learning-rate schedule")
        ->check(CLI::IsMember({"cosine", "constant"}))
        ->default_str(std::string(nn::to_string(c.train.schedule)));
    app->add_option("--final-lr-fraction", c.train.final_lr_fraction,
                    "Cosine schedule: last-epoch rate as a fraction of --lr");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    RunConfig c;
    try {
        if (const auto path = find_config_path(args)) apply_config_file(*path, c);
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const IoError& e) {
        err << "error: " << e.what() << "\n";
        return kIo;
    }

    CLI::App app{"Shape sensing for a single-section continuum robot with a 4x4 e-textile sensor"};
    app.option_defaults()->always_capture_default();
    app.require_subcommand(1);
    std::string config_path;
    const auto common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "JSON config file; flags override its values");
        sub->add_option("--length", c.length, "Section arc length (m)");
    };

    auto* gen = app.add_subcommand("generate", "Simulate the sensor over the workspace grid and write a dataset CSV");
    common(gen);
    gen->add_option("--out", c.out, "Output dataset CSV");
    gen->add_option("--n-kappa", c.n_kappa, "Curvature grid points (>= 2)");
    gen->add_option("--n-phi", c.n_phi, "Bending-plane grid points (>= 1)");
    gen->add_option("--seed", c.seed, "Sensor noise seed");
    add_sensor_flags(gen, c);

    auto* ingest = app.add_subcommand("ingest", "Validate a recorded frame log into a canonical dataset CSV");
    common(ingest);
    ingest->add_option("--in", c.in, "Input log (one frame line per record)");
    ingest->add_option("--out", c.out, "Output dataset CSV");
    ingest->add_flag("--strict", c.strict, "Abort on the first malformed line");

    auto* trn = app.add_subcommand("train", "Train a regressor and write the model JSON and loss history");
    common(trn);
    trn->add_option("--data", c.data, "Dataset CSV");
    trn->add_option("--arch", c.arch, "Architecture: ref, m1, m2, m3, m4, m5");
    trn->add_option("--out", c.out, "Output model JSON");
    trn->add_option("--history", c.history, "Output history CSV (epoch,train_mse,val_mse)");
    trn->add_option("--seed", c.seed, "Seed for split, initialization and shuffling");
    add_train_flags(trn, c, c.train.epochs);

    auto* ev = app.add_subcommand("eval", "Evaluate a trained model and write per-sample errors");
    common(ev);
    ev->add_option("--model", c.model, "Model JSON");
    ev->add_option("--data", c.data, "Dataset CSV");
    ev->add_option("--out", c.out, "Output report CSV");
    ev->add_option("--split", c.split, "Split to evaluate: train, val, test, all");
    ev->add_option("--first", c.first, "Write only the first N rows (0 = all)");
    ev->add_option("--seed", c.seed, "Split seed (must match training)");

    auto* cv = app.add_subcommand("crossval", "Run the five-architecture k-fold study");
    common(cv);
    cv->add_option("--data", c.data, "Dataset CSV");
    cv->add_option("--out", c.out, "Output CvReport CSV");
    cv->add_option("--curves", c.curves, "Output per-fold loss curves CSV");
    cv->add_option("--folds", c.folds, "Number of folds (k)");
    cv->add_option("--threads", c.threads, "Worker threads (0 = all cores)");
    cv->add_option("--seed", c.seed, "Seed for fold assignment and training");
    add_train_flags(cv, c, c.cv_epochs);

    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    }

    try {
        if (*gen) cmd_generate(c, out);
        else if (*ingest) return cmd_ingest(c, out, err);
        else if (*trn) cmd_train(c, out);
        else if (*ev) cmd_eval(c, out);
        else if (*cv) cmd_crossval(c, out);
        return kOk;
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const IoError& e) {
        err << "error: " << e.what() << "\n";
        return kIo;
    } catch (const ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kData;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kData;
    }
}

}  // namespace shapesense::cli
