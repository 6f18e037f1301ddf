// embmf pipeline driver: prepare -> ppmi -> train -> eval / sweep / predict,
// staged through files in one output directory so artifacts are reusable
// across runs.

#include <CLI11.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "embmf/data.hpp"
#include "embmf/data_io.hpp"
#include "embmf/errors.hpp"
#include "embmf/eval.hpp"
#include "embmf/log.hpp"
#include "embmf/model.hpp"
#include "embmf/ppmi.hpp"
#include "embmf/trainer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Options {
    std::optional<std::string> config_path;
    std::optional<std::string> input;
    std::optional<std::string> format;
    std::optional<std::string> out;
    std::optional<std::string> dataset_name;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> mode;
    std::optional<double> percent;
    std::optional<double> train_fraction;
    std::optional<double> validation_fraction;
    std::optional<std::string> denominator;
    std::optional<std::size_t> max_clicks_per_user;
    std::optional<double> scale_min;
    std::optional<double> scale_max;
    std::optional<int> d;
    std::optional<double> lambda;
    std::optional<double> lambda_theta;
    std::optional<double> lambda_beta;
    std::optional<double> lambda_rho;
    std::optional<double> lambda_alpha;
    std::optional<double> lambda_b;
    std::optional<double> lambda_c;
    std::optional<int> max_sweeps;
    std::optional<double> rel_tol;
    std::optional<double> init_scale;
    std::optional<std::string> model_mode;
    std::optional<int> threads;
    bool clamp_flag = false;  // flags are presence-only
    std::optional<std::vector<double>> lambda_beta_grid;
    std::optional<std::string> user;
    std::optional<std::string> item;
};

const std::set<std::string> kKnownKeys = {
    "input",         "format",       "out",          "dataset_name",  "seed",
    "mode",          "percent",      "train_fraction", "validation_fraction",
    "denominator",   "max_clicks_per_user",          "scale_min",     "scale_max",
    "d",             "lambda",       "lambda_theta", "lambda_beta",   "lambda_rho",
    "lambda_alpha",  "lambda_b",     "lambda_c",     "max_sweeps",    "rel_tol",
    "init_scale",    "model_mode",   "threads",      "clamp",         "lambda_beta_grid",
    "user",          "item"};

// Fully resolved settings: flag > config file > default.
struct RunConfig {
    std::string input;
    embmf::InputFormat format = embmf::InputFormat::movielens_dat;
    fs::path out;
    std::string dataset_name;
    std::uint64_t seed = 42;
    embmf::SplitMode mode = embmf::SplitMode::in_matrix;
    double percent = 100.0;
    double train_fraction = 0.8;
    double validation_fraction = 0.1;
    embmf::DenominatorMode denominator = embmf::DenominatorMode::user_count;
    std::size_t max_clicks_per_user = 0;
    double scale_min = 1.0;
    double scale_max = 5.0;
    embmf::Hyperparams hyper;
    int threads = 1;
    bool clamp = false;
    std::vector<double> lambda_beta_grid = {0.1, 1.0, 10.0, 20.0, 50.0, 100.0, 1000.0};
    std::string user;
    std::string item;

    bool has_input = false;
    bool has_user = false;
    bool has_item = false;
};

json load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw embmf::ConfigError("cannot open config file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw embmf::ConfigError("bad json in config file " + path + ": " + e.what());
    }
    if (!j.is_object()) throw embmf::ConfigError("config file must hold a json object");

    std::vector<std::string> unknown;
    for (const auto& [key, value] : j.items())
        if (!kKnownKeys.count(key)) unknown.push_back(key);
    if (!unknown.empty()) {
        std::ostringstream os;
        os << "unknown config key" << (unknown.size() > 1 ? "s" : "") << ":";
        for (const auto& k : unknown) os << " " << k;
        throw embmf::ConfigError(os.str());
    }
    return j;
}

template <typename T>
void merge(T& dest, const std::optional<T>& flag, const json& cfg, const char* key) {
    if (flag) {
        dest = *flag;
        return;
    }
    if (cfg.contains(key)) {
        try {
            dest = cfg.at(key).get<T>();
        } catch (const json::exception&) {
            throw embmf::ConfigError(std::string("config key '") + key + "' has the wrong type");
        }
    }
}

RunConfig resolve(const Options& opts, const std::string& command) {
    json cfg = json::object();
    if (opts.config_path) cfg = load_config_file(*opts.config_path);

    RunConfig rc;
    std::string format_s = "movielens_dat", mode_s = "in-matrix", denominator_s = "user-count",
                model_mode_s = "emb_mf";

    merge(rc.input, opts.input, cfg, "input");
    rc.has_input = opts.input.has_value() || cfg.contains("input");
    merge(format_s, opts.format, cfg, "format");
    std::string out_s;
    merge(out_s, opts.out, cfg, "out");
    rc.out = out_s;
    merge(rc.dataset_name, opts.dataset_name, cfg, "dataset_name");
    merge(rc.seed, opts.seed, cfg, "seed");
    merge(mode_s, opts.mode, cfg, "mode");
    merge(rc.percent, opts.percent, cfg, "percent");
    merge(rc.train_fraction, opts.train_fraction, cfg, "train_fraction");
    merge(rc.validation_fraction, opts.validation_fraction, cfg, "validation_fraction");
    merge(denominator_s, opts.denominator, cfg, "denominator");
    merge(rc.max_clicks_per_user, opts.max_clicks_per_user, cfg, "max_clicks_per_user");
    merge(rc.scale_min, opts.scale_min, cfg, "scale_min");
    merge(rc.scale_max, opts.scale_max, cfg, "scale_max");
    merge(rc.hyper.d, opts.d, cfg, "d");
    merge(rc.hyper.lambda, opts.lambda, cfg, "lambda");
    merge(rc.hyper.lambda_theta, opts.lambda_theta, cfg, "lambda_theta");
    merge(rc.hyper.lambda_beta, opts.lambda_beta, cfg, "lambda_beta");
    merge(rc.hyper.lambda_rho, opts.lambda_rho, cfg, "lambda_rho");
    merge(rc.hyper.lambda_alpha, opts.lambda_alpha, cfg, "lambda_alpha");
    merge(rc.hyper.lambda_b, opts.lambda_b, cfg, "lambda_b");
    merge(rc.hyper.lambda_c, opts.lambda_c, cfg, "lambda_c");
    merge(rc.hyper.max_sweeps, opts.max_sweeps, cfg, "max_sweeps");
    merge(rc.hyper.rel_tol, opts.rel_tol, cfg, "rel_tol");
    merge(rc.hyper.init_scale, opts.init_scale, cfg, "init_scale");
    merge(model_mode_s, opts.model_mode, cfg, "model_mode");
    merge(rc.threads, opts.threads, cfg, "threads");
    rc.clamp = opts.clamp_flag || (cfg.contains("clamp") && cfg.at("clamp").get<bool>());
    merge(rc.lambda_beta_grid, opts.lambda_beta_grid, cfg, "lambda_beta_grid");
    merge(rc.user, opts.user, cfg, "user");
    rc.has_user = opts.user.has_value() || cfg.contains("user");
    merge(rc.item, opts.item, cfg, "item");
    rc.has_item = opts.item.has_value() || cfg.contains("item");

    rc.format = embmf::input_format_from_string(format_s);
    rc.mode = embmf::split_mode_from_string(mode_s);
    rc.denominator = embmf::denominator_mode_from_string(denominator_s);
    rc.hyper.mode = embmf::model_mode_from_string(model_mode_s);
    rc.hyper.seed = rc.seed;

    std::vector<std::string> missing;
    if (rc.out.empty()) missing.push_back("out");
    if (command == "prepare" && !rc.has_input) missing.push_back("input");
    if (command == "predict") {
        if (!rc.has_user) missing.push_back("user");
        if (!rc.has_item) missing.push_back("item");
    }
    if (!missing.empty()) {
        std::ostringstream os;
        os << "missing required setting" << (missing.size() > 1 ? "s" : "") << ":";
        for (const auto& k : missing) os << " --" << k;
        throw embmf::ConfigError(os.str());
    }

    if (rc.dataset_name.empty())
        rc.dataset_name = rc.out.filename().empty() ? rc.out.parent_path().filename().string()
                                                    : rc.out.filename().string();
    if (rc.threads < 1) throw embmf::ConfigError("threads must be >= 1");
    if (!(rc.scale_min < rc.scale_max)) throw embmf::ConfigError("scale_min must be < scale_max");
    return rc;
}

void add_common_options(CLI::App* cmd, Options& o) {
    cmd->add_option("--config", o.config_path, "JSON config file; flags override its keys");
    cmd->add_option("--out", o.out, "Pipeline output directory");
    cmd->add_option("--seed", o.seed, "Seed for every randomized stage");
    cmd->add_option("--mode", o.mode, "Split mode: in-matrix or out-matrix");
    cmd->add_option("--percent", o.percent, "Percent of rated records kept (0,100]");
    cmd->add_option("--lambda-beta", o.lambda_beta, "Tether strength of beta to rho");
    cmd->add_option("--denominator", o.denominator, "PMI normalizer: user-count or pair-count");
    cmd->add_flag("--clamp", o.clamp_flag, "Clamp predictions to the rating scale before RMSE");
    cmd->add_option("--threads", o.threads, "Worker threads for row-parallel phases");
    cmd->add_option("--input", o.input, "Raw interaction file (prepare)");
    cmd->add_option("--format", o.format, "Input format: movielens_dat or csv");
    cmd->add_option("--dataset-name", o.dataset_name, "Label recorded in manifests and ledgers");
    cmd->add_option("--train-fraction", o.train_fraction, "Train share of ratings (0,1)");
    cmd->add_option("--validation-fraction", o.validation_fraction,
                    "Validation share carved from train (0,1)");
    cmd->add_option("--max-clicks-per-user", o.max_clicks_per_user,
                    "Skip users with more clicks than this (0 = no cap)");
    cmd->add_option("--scale-min", o.scale_min, "Rating scale lower bound");
    cmd->add_option("--scale-max", o.scale_max, "Rating scale upper bound");
    cmd->add_option("--dim,-d", o.d, "Latent dimensionality");
    cmd->add_option("--lambda", o.lambda, "Click-term weight");
    cmd->add_option("--lambda-theta", o.lambda_theta, "User vector regularizer");
    cmd->add_option("--lambda-rho", o.lambda_rho, "Embedding vector regularizer");
    cmd->add_option("--lambda-alpha", o.lambda_alpha, "Context vector regularizer");
    cmd->add_option("--lambda-b", o.lambda_b, "User bias regularizer");
    cmd->add_option("--lambda-c", o.lambda_c, "Item bias regularizer");
    cmd->add_option("--max-sweeps", o.max_sweeps, "Coordinate descent sweep budget");
    cmd->add_option("--rel-tol", o.rel_tol, "Relative objective decrease to stop");
    cmd->add_option("--init-scale", o.init_scale, "Stddev of the random initialization");
    cmd->add_option("--model-mode", o.model_mode, "emb_mf or pmf_baseline");
    cmd->add_option("--lambda-beta-grid", o.lambda_beta_grid, "Sweep grid for lambda_beta");
    cmd->add_option("--user", o.user, "User id (predict)");
    cmd->add_option("--item", o.item, "Item id (predict)");
}

// ---------------------------------------------------------------------------

int cmd_prepare(const RunConfig& rc) {
    fs::create_directories(rc.out);
    auto records = embmf::parse_interactions(rc.input, rc.format);
    auto ids = embmf::IdMap::from_records(records);
    auto clicks = embmf::binarize_to_clicks(records, ids);
    auto ratings = embmf::subsample_ratings(records, ids, rc.percent, rc.seed);

    embmf::SplitSpec spec;
    spec.mode = rc.mode;
    spec.train_fraction = rc.train_fraction;
    spec.validation_fraction_of_train = rc.validation_fraction;
    spec.seed = rc.seed;
    auto splits = embmf::split_ratings(ratings, spec);

    embmf::write_clicks_csv(rc.out / "clicks.csv", clicks, ids);
    embmf::write_ratings_csv(rc.out / "train.csv", splits.train, ids);
    embmf::write_ratings_csv(rc.out / "validation.csv", splits.validation, ids);
    embmf::write_ratings_csv(rc.out / "test.csv", splits.test, ids);

    embmf::DatasetManifest manifest;
    manifest.dataset_name = rc.dataset_name;
    manifest.input_path = rc.input;
    manifest.format = rc.format;
    manifest.seed = rc.seed;
    manifest.mode = rc.mode;
    manifest.percent = rc.percent;
    manifest.train_fraction = rc.train_fraction;
    manifest.validation_fraction = rc.validation_fraction;
    manifest.scale_min = rc.scale_min;
    manifest.scale_max = rc.scale_max;
    manifest.n_users = ids.user_count();
    manifest.n_items = ids.item_count();
    manifest.n_click_events = clicks.total_clicks();
    manifest.n_ratings_sampled = ratings.size();
    manifest.n_train = splits.train.size();
    manifest.n_validation = splits.validation.size();
    manifest.n_test = splits.test.size();
    manifest.rating_density =
        static_cast<double>(ratings.size()) /
        (static_cast<double>(ids.user_count()) * static_cast<double>(ids.item_count()));
    manifest.ids = ids;
    embmf::write_manifest(rc.out / "manifest.json", manifest);

    std::cout << "prepared " << rc.out.string() << ": users=" << manifest.n_users
              << " items=" << manifest.n_items << " ratings=" << manifest.n_ratings_sampled
              << " density=" << embmf::format_double(100.0 * manifest.rating_density)
              << "% train/val/test=" << manifest.n_train << "/" << manifest.n_validation << "/"
              << manifest.n_test << "\n";
    return 0;
}

int cmd_ppmi(const RunConfig& rc) {
    auto manifest = embmf::load_manifest(rc.out / "manifest.json");
    auto clicks = embmf::load_clicks_csv(rc.out / "clicks.csv", manifest.ids);
    if (clicks.total_clicks() == 0) embmf::log::error("click log is empty; writing an empty matrix");

    auto stats = embmf::count_cooccurrence(clicks, rc.max_clicks_per_user);
    auto ppmi = embmf::build_ppmi(stats, rc.denominator);
    embmf::write_ppmi(rc.out / "ppmi.csv", rc.out / "ppmi.meta.json", ppmi, rc.denominator);

    const double denom = static_cast<double>(ppmi.n_items) * std::max(1, ppmi.n_items - 1);
    std::cout << "ppmi " << rc.out.string() << ": items=" << ppmi.n_items << " nnz=" << ppmi.nnz
              << " density=" << embmf::format_double(100.0 * static_cast<double>(ppmi.nnz) / denom)
              << "%\n";
    return 0;
}

int cmd_train(const RunConfig& rc) {
    auto manifest = embmf::load_manifest(rc.out / "manifest.json");
    auto train = embmf::load_ratings_csv(rc.out / "train.csv", manifest.ids);
    auto ppmi = embmf::load_ppmi(rc.out / "ppmi.csv", rc.out / "ppmi.meta.json");
    if (ppmi.matrix.n_items != manifest.n_items)
        throw embmf::DataError("ppmi matrix and manifest disagree on the item count");

    embmf::FitOptions options;
    options.threads = rc.threads;
    options.progress = &std::cout;
    auto [params, report] = embmf::fit(train, ppmi.matrix, rc.hyper, options);

    embmf::ModelMeta meta;
    meta.sweeps_run = report.sweeps_run;
    meta.final_objective = report.objective_per_sweep.empty()
                               ? 0.0
                               : report.objective_per_sweep.back();
    meta.id_map_ref = "manifest.json";
    embmf::save_model(params, rc.hyper, meta, rc.out / "model.embmf");

    json rj;
    rj["objective_per_sweep"] = report.objective_per_sweep;
    rj["sweeps_run"] = report.sweeps_run;
    rj["converged"] = report.converged;
    rj["wall_time_per_sweep"] = report.wall_time_per_sweep;
    std::ofstream rout(rc.out / "train_report.json");
    rout << rj.dump(2) << "\n";
    if (!rout) throw embmf::DataError("cannot write train_report.json");

    embmf::log::info("trained ", to_string(rc.hyper.mode), " model: sweeps=", report.sweeps_run,
                     " converged=", report.converged,
                     " objective=", meta.final_objective);
    return 0;
}

int cmd_eval(const RunConfig& rc) {
    auto manifest = embmf::load_manifest(rc.out / "manifest.json");
    auto loaded = embmf::load_model(rc.out / "model.embmf");
    auto test = embmf::load_ratings_csv(rc.out / "test.csv", manifest.ids);
    auto ppmi_meta = embmf::load_ppmi(rc.out / "ppmi.csv", rc.out / "ppmi.meta.json");

    const auto t0 = std::chrono::steady_clock::now();
    auto result = embmf::rmse(loaded.params, test, rc.clamp,
                              embmf::RatingScale{manifest.scale_min, manifest.scale_max});
    result.mode = manifest.mode;
    result.hyper = loaded.hyper;
    result.dataset = manifest.dataset_name;
    result.denominator = ppmi_meta.mode;
    result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    embmf::append_result_csv(rc.out / "results.csv", result);
    embmf::append_result_ndjson(rc.out / "results.ndjson", result);
    std::cout << "rmse=" << embmf::format_double(result.rmse) << " n_test=" << result.n_test
              << " mode=" << to_string(result.mode) << " clamp=" << (result.clamp ? 1 : 0) << "\n";
    return 0;
}

int cmd_sweep(const RunConfig& rc) {
    auto manifest = embmf::load_manifest(rc.out / "manifest.json");
    auto ppmi = embmf::load_ppmi(rc.out / "ppmi.csv", rc.out / "ppmi.meta.json");
    if (ppmi.matrix.n_items != manifest.n_items)
        throw embmf::DataError("ppmi matrix and manifest disagree on the item count");

    embmf::ExperimentData data;
    data.name = manifest.dataset_name;
    data.mode = manifest.mode;
    data.splits.train = embmf::load_ratings_csv(rc.out / "train.csv", manifest.ids);
    data.splits.validation = embmf::load_ratings_csv(rc.out / "validation.csv", manifest.ids);
    data.splits.test = embmf::load_ratings_csv(rc.out / "test.csv", manifest.ids);
    data.ppmi = ppmi.matrix;
    data.denominator = ppmi.mode;
    data.scale = {manifest.scale_min, manifest.scale_max};

    embmf::FitOptions options;
    options.threads = rc.threads;
    auto sweep = embmf::lambda_beta_sweep(data, rc.hyper, rc.lambda_beta_grid, rc.clamp, options);

    std::ofstream out(rc.out / "sweep.csv");
    if (!out) throw embmf::DataError("cannot write sweep.csv");
    out << "lambda_beta,rmse,n_test,seconds\n";
    for (const auto& [lb, result] : sweep) {
        out << embmf::format_double(lb) << ',' << embmf::format_double(result.rmse) << ','
            << result.n_test << ',' << embmf::format_double(result.seconds) << '\n';
        embmf::append_result_csv(rc.out / "results.csv", result);
        embmf::append_result_ndjson(rc.out / "results.ndjson", result);
        std::cout << "lambda_beta=" << embmf::format_double(lb)
                  << " rmse=" << embmf::format_double(result.rmse) << "\n";
    }
    return 0;
}

int cmd_predict(const RunConfig& rc) {
    auto manifest = embmf::load_manifest(rc.out / "manifest.json");
    auto loaded = embmf::load_model(rc.out / "model.embmf");
    auto u = manifest.ids.user_index(rc.user);
    auto i = manifest.ids.item_index(rc.item);
    if (!u) embmf::log::info("user '", rc.user, "' is unknown; its terms contribute zero");
    if (!i) embmf::log::info("item '", rc.item, "' is unknown; its terms contribute zero");
    std::cout << embmf::format_double(embmf::predict(loaded.params, u, i)) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cold-start rating prediction from clicks: PPMI item embeddings coupled with "
                 "biased matrix factorization"};
    app.require_subcommand(1);
    Options opts;

    auto* prepare = app.add_subcommand("prepare", "Parse raw interactions, build splits + clicks");
    auto* ppmi = app.add_subcommand("ppmi", "Build the PPMI matrix from the click log");
    auto* train = app.add_subcommand("train", "Fit the model by coordinate descent");
    auto* eval = app.add_subcommand("eval", "Score the trained model on the test split");
    auto* sweep = app.add_subcommand("sweep", "Run the lambda_beta sensitivity sweep");
    auto* predict = app.add_subcommand("predict", "Predict one user/item rating");
    for (auto* cmd : {prepare, ppmi, train, eval, sweep, predict}) add_common_options(cmd, opts);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    const std::string command = app.get_subcommands().front()->get_name();
    try {
        auto rc = resolve(opts, command);
        if (command == "prepare") return cmd_prepare(rc);
        if (command == "ppmi") return cmd_ppmi(rc);
        if (command == "train") return cmd_train(rc);
        if (command == "eval") return cmd_eval(rc);
        if (command == "sweep") return cmd_sweep(rc);
        if (command == "predict") return cmd_predict(rc);
        throw embmf::ConfigError("unknown command " + command);
    } catch (const embmf::ConfigError& e) {
        embmf::log::error(e.what());
        return 1;
    } catch (const embmf::DataError& e) {
        embmf::log::error(e.what());
        return 2;
    } catch (const embmf::NumericError& e) {
        embmf::log::error(e.what());
        return 3;
    } catch (const std::exception& e) {
        embmf::log::error("internal error: ", e.what());
        return 3;
    }
}
