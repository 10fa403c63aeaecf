// Command-line front end: noise injection, the two learning stages,
// prediction, evaluation and the repeated-split benchmark.
//
// Every option can also be set through an environment variable named after
// the flag with a PML3ER_ prefix (`--lambda2-grid` -> PML3ER_LAMBDA2_GRID).
// An explicit flag wins over the environment.
//
// Exit codes: 0 success, 1 usage or configuration error, 2 data error,
// 3 numeric failure.

#include "pml3er/dataset_io.hpp"
#include "pml3er/experiment.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

using namespace pml3er;

namespace {

std::string env_name(std::string flag)
{
    std::string out = "PML3ER_";
    for (char c : flag) out += c == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return out;
}

template <typename T>
CLI::Option* opt(CLI::App* app, const std::string& flag, T& value, const std::string& help)
{
    return app->add_option("--" + flag, value, help)->envname(env_name(flag))->capture_default_str();
}

CLI::Option* flag(CLI::App* app, const std::string& name, bool& value, const std::string& help)
{
    return app->add_flag("--" + name, value, help)->envname(env_name(name));
}

struct Options {
    std::string in;
    std::string input_format = "auto";
    std::string out;
    std::string format = "json";
    std::string model;
    std::string yhat;
    std::string trace;
    std::string pred;
    int noise = 100;
    int splits = 5;
    double split_fraction = 0.5;
    Index k = 10;
    double alpha = 0.05;
    double lambda1 = 1.0;
    std::optional<double> lambda2;
    std::vector<double> lambda2_grid{10.0, 100.0};
    double tau = 1.0;
    int admm_iters = 5;
    int cv_folds = 5;
    std::uint64_t seed = 0;
    bool standardize = false;
    bool add_bias = false;
};

Dataset read_input(const Options& o)
{
    if (o.in.empty()) throw ConfigError("--in is required");
    if (o.input_format == "auto") return load_dataset(o.in);
    return load_dataset(o.in, parse_data_format(o.input_format));
}

DataFormat output_format(const Options& o)
{
    if (o.input_format != "auto") return parse_data_format(o.input_format);
    return detect_data_format(text::read_lines(o.in));
}

void emit(const Options& o, const std::string& content)
{
    if (o.out.empty() || o.out == "-")
        std::cout << content;
    else
        text::write_file(o.out, content);
}

ExperimentConfig experiment_config(const Options& o)
{
    ExperimentConfig cfg;
    cfg.noise_percent = o.noise;
    cfg.splits = o.splits;
    cfg.split_fraction = o.split_fraction;
    cfg.knn = KnnConfig{o.k, o.standardize};
    cfg.propagation.alpha = o.alpha;
    cfg.trainer.lambda1 = o.lambda1;
    cfg.trainer.tau = o.tau;
    cfg.trainer.admm_iters = o.admm_iters;
    cfg.lambda2 = o.lambda2;
    cfg.lambda2_grid = o.lambda2_grid;
    cfg.cv_folds = o.cv_folds;
    cfg.add_bias = o.add_bias;
    cfg.seed = o.seed;
    cfg.validate();
    return cfg;
}

std::string report_text(const Options& o, const std::vector<MetricsReport>& reports)
{
    if (o.format == "csv") return reports_to_csv(reports);
    if (reports.size() == 1) return report_to_json(reports.front()).dump(2) + "\n";
    return reports_to_json(reports).dump(2) + "\n";
}

void print_summary(const MetricSummary& s, std::size_t splits)
{
    std::printf("%-10s %8s %8s   (%zu split%s)\n", "metric", "mean", "std", splits,
                splits == 1 ? "" : "s");
    const auto mean = s.mean.values(), sd = s.std.values();
    for (std::size_t k = 0; k < mean.size(); ++k)
        std::printf("%-10s %8.4f %8.4f\n", std::string(MetricsReport::names[k]).c_str(), mean[k],
                    sd[k]);
}

/// Predictions file: `#m l` header, then one `scores;labels` line per
/// instance with the predicted labels as comma-separated indices.
std::string format_predictions(const Prediction& p)
{
    std::string out =
        "#" + std::to_string(p.scores.rows()) + " " + std::to_string(p.scores.cols()) + "\n";
    for (Index i = 0; i < p.scores.rows(); ++i) {
        for (Index j = 0; j < p.scores.cols(); ++j) {
            if (j) out += ',';
            text::append_real(out, p.scores(i, j));
        }
        out += ';';
        bool first = true;
        for (Index j = 0; j < p.scores.cols(); ++j)
            if (p.labels(i, j)) {
                if (!first) out += ',';
                out += std::to_string(j);
                first = false;
            }
        out += '\n';
    }
    return out;
}

Prediction read_predictions(const std::string& path)
{
    const auto lines = text::read_lines(path);
    if (lines.empty()) throw ParseError("empty predictions file", 1);
    const auto h = text::parse_header(lines[0], 2, 1);
    const auto m = static_cast<Index>(h[0]), l = static_cast<Index>(h[1]);
    Prediction p{Matrix(m, l), LabelMatrix::Constant(m, l, false)};
    Index row = 0;
    for (std::size_t k = 1; k < lines.size(); ++k) {
        const auto line = text::trim(lines[k]);
        if (line.empty()) continue;
        if (row == m) throw ParseError("more prediction rows than the header declares", k + 1);
        const auto parts = text::split(line, ';');
        if (parts.size() != 2) throw ParseError("expected 'scores;labels'", k + 1);
        const auto scores = text::split(parts[0], ',');
        if (static_cast<Index>(scores.size()) != l)
            throw ParseError("expected " + std::to_string(l) + " scores", k + 1);
        for (Index j = 0; j < l; ++j)
            p.scores(row, j) = text::parse_real(scores[static_cast<std::size_t>(j)], k + 1);
        if (!text::trim(parts[1]).empty())
            for (auto tok : text::split(parts[1], ',')) {
                const auto j = text::parse_int<std::size_t>(tok, k + 1);
                if (j >= static_cast<std::size_t>(l))
                    throw RangeError("line " + std::to_string(k + 1) + ": label index " +
                                     std::to_string(j) + " out of range");
                p.labels(row, static_cast<Index>(j)) = true;
            }
        ++row;
    }
    if (row != m)
        throw ParseError("expected " + std::to_string(m) + " prediction rows, found " +
                             std::to_string(row),
                         lines.size());
    return p;
}

void cmd_inject_noise(const Options& o)
{
    const Dataset clean = read_input(o);
    const auto noisy = inject_noise(clean, NoiseConfig{o.noise, derive_seed(o.seed, "noise")});
    emit(o, format_dataset(noisy, output_format(o)));
}

EnrichmentResult run_enrichment(const Options& o, const Dataset& ds)
{
    const auto cfg = experiment_config(o);
    return enrich_labels(ds.features(), ds.candidates(), cfg.knn, cfg.propagation);
}

void cmd_enrich(const Options& o)
{
    const Dataset ds = read_input(o);
    const auto res = run_enrichment(o, ds);
    if (!res.converged)
        std::cerr << "warning: propagation stopped at the iteration cap (" << res.iterations
                  << ")\n";
    emit(o, text::matrix_to_csv(res.yhat));
}

void cmd_train(const Options& o)
{
    const Dataset ds = read_input(o);
    const auto cfg = experiment_config(o);
    Matrix yhat;
    if (!o.yhat.empty()) {
        yhat = text::read_matrix_csv(o.yhat);
        detail::require_shape(yhat.rows() == ds.n() && yhat.cols() == ds.l(),
                              "enrichment matrix does not match the dataset");
    } else {
        yhat = run_enrichment(o, ds).yhat;
    }
    double lambda2 = 0.0;
    if (o.lambda2) {
        lambda2 = *o.lambda2;
    } else {
        const auto sel = select_lambda2(ds, o.lambda2_grid, o.cv_folds, derive_seed(o.seed, "cv"), cfg);
        for (const auto& [value, ap] : sel.scores)
            std::cerr << "lambda2=" << text::format_real(value) << " cv-ap=" << text::format_real(ap)
                      << "\n";
        lambda2 = sel.lambda2;
    }
    const auto res = train_on_enrichment(ds.features(), yhat, ds.candidates(), cfg.trainer,
                                         lambda2, o.add_bias);
    if (!o.trace.empty()) text::write_file(o.trace, format_trace(res.trace));
    emit(o, format_model(res.model));
}

void cmd_predict(const Options& o)
{
    if (o.model.empty()) throw ConfigError("--model is required");
    const Model model = load_model(o.model);
    const Dataset ds = read_input(o);
    emit(o, format_predictions(predict(model, ds.features())));
}

void cmd_evaluate(const Options& o)
{
    if (o.pred.empty()) throw ConfigError("--pred is required");
    const Dataset ds = read_input(o);
    const auto p = read_predictions(o.pred);
    const auto r = evaluate(p.scores, p.labels, ds.truth());
    emit(o, report_text(o, {r}));
}

void cmd_benchmark(const Options& o)
{
    const Dataset ds = read_input(o);
    const auto cfg = experiment_config(o);
    const auto res = run_benchmark(ds, cfg);
    for (std::size_t s = 0; s < res.splits.size(); ++s)
        std::cerr << "split " << s << ": lambda2=" << text::format_real(res.splits[s].lambda2)
                  << " ap=" << text::format_real(res.splits[s].report.ap) << "\n";
    print_summary(res.summary, res.splits.size());
    const auto content = o.format == "csv" ? reports_to_csv(res.reports())
                                           : reports_to_json(res.reports()).dump(2) + "\n";
    if (!o.out.empty() && o.out != "-") text::write_file(o.out, content);
}

int exit_code_for(const Error& e)
{
    if (dynamic_cast<const ConfigError*>(&e)) return 1;
    if (dynamic_cast<const NumericError*>(&e)) return 3;
    return 2;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Partial multi-label learning with label enrichment and recovery"};
    app.require_subcommand(1);
    Options o;

    const auto io_options = [&](CLI::App* sub) {
        opt(sub, "in", o.in, "input dataset");
        opt(sub, "input-format", o.input_format, "dataset format: auto, sparse or dense")
            ->check(CLI::IsMember({"auto", "sparse", "sparse-multilabel", "dense", "dense-csv", "csv"}));
        opt(sub, "out", o.out, "output file (stdout when omitted)");
    };
    const auto enrich_options = [&](CLI::App* sub) {
        opt(sub, "k", o.k, "neighbors per instance")->check(CLI::PositiveNumber);
        opt(sub, "alpha", o.alpha, "propagation rate in [0,1]")->check(CLI::Range(0.0, 1.0));
        flag(sub, "standardize-features", o.standardize,
             "z-score features before building the neighbor graph");
    };
    const auto train_options = [&](CLI::App* sub) {
        opt(sub, "lambda1", o.lambda1, "nuclear-norm weight");
        opt(sub, "lambda2", o.lambda2, "ridge weight; skips cross-validation");
        opt(sub, "lambda2-grid", o.lambda2_grid, "candidate ridge weights for cross-validation")
            ->delimiter(',');
        opt(sub, "tau", o.tau, "ADMM penalty");
        opt(sub, "admm-iters", o.admm_iters, "ADMM passes per outer iteration");
        opt(sub, "cv-folds", o.cv_folds, "cross-validation folds");
        flag(sub, "add-bias", o.add_bias, "append a constant-1 feature");
    };
    const auto format_option = [&](CLI::App* sub) {
        opt(sub, "format", o.format, "report format")->check(CLI::IsMember({"json", "csv"}));
    };

    auto* noise = app.add_subcommand("inject-noise", "add random irrelevant candidate labels");
    io_options(noise);
    opt(noise, "noise", o.noise, "noise level a in percent");
    opt(noise, "seed", o.seed, "master seed");
    noise->callback([&] { cmd_inject_noise(o); });

    auto* enrich_cmd = app.add_subcommand("enrich", "write the enriched label matrix");
    io_options(enrich_cmd);
    enrich_options(enrich_cmd);
    enrich_cmd->callback([&] { cmd_enrich(o); });

    auto* train = app.add_subcommand("train", "fit a linear predictor");
    io_options(train);
    enrich_options(train);
    train_options(train);
    opt(train, "yhat", o.yhat, "precomputed enriched labels (from `enrich`)");
    opt(train, "trace", o.trace, "write the objective trace as CSV");
    opt(train, "seed", o.seed, "seed for the cross-validation folds");
    train->callback([&] { cmd_train(o); });

    auto* pred = app.add_subcommand("predict", "score a dataset with a trained model");
    io_options(pred);
    opt(pred, "model", o.model, "model file (from `train`)");
    pred->callback([&] { cmd_predict(o); });

    auto* eval = app.add_subcommand("evaluate", "score predictions against ground truth");
    io_options(eval);
    format_option(eval);
    opt(eval, "pred", o.pred, "predictions file (from `predict`)");
    eval->callback([&] { cmd_evaluate(o); });

    auto* bench = app.add_subcommand("benchmark", "noise, repeated splits, train and evaluate");
    io_options(bench);
    enrich_options(bench);
    train_options(bench);
    format_option(bench);
    opt(bench, "noise", o.noise, "noise level a in percent");
    opt(bench, "splits", o.splits, "number of train/test splits");
    opt(bench, "split-fraction", o.split_fraction, "training fraction per split");
    opt(bench, "seed", o.seed, "master seed");
    bench->callback([&] { cmd_benchmark(o); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
