// volcal command-line front end: price, calibrate, evaluate, simulate, report.
// Exit codes: 0 success, 2 input error, 3 numerical failure, 4 calibration failure.

#include <cctype>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <volcal/volcal.hpp>

namespace fs = std::filesystem;
using namespace volcal;

namespace {

struct Options {
    std::string model;
    std::string quotes_path;
    std::string params_path;
    std::uint64_t seed = 0;
    int starts = 3;
    int max_evals = 2000;
    int order = 4;
    std::int64_t paths = 200000;
    int steps = 250;
    bool no_split = false;
    bool no_antithetic = false;
    std::string output_dir;
    std::string format = "text";
    std::string loss = "sse";
    double feller_weight = 0.0;
    double tolerance = 1e-10;
    double spot = 0.0;
    double strike = 0.0;
    double rate = 0.0;
    double tau = 0.0;
    std::string bs_calib;
    std::string heston_calib;
    std::string msv_calib;
    std::string report_path;
    std::string rows_path;
};

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw ParseError("cannot open file: " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw InvalidInput("cannot write file: " + p.string());
    out << text;
    out.flush();
    if (!out) throw InvalidInput("failed while writing file: " + p.string());
}

std::string sanitize_label(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        const bool keep = std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' ||
                          c == '.';
        out.push_back(keep ? c : '_');
    }
    return out.empty() ? std::string("dataset") : out;
}

fs::path ensure_output_dir(const Options& opt) {
    const fs::path dir = opt.output_dir.empty() ? fs::path(".") : fs::path(opt.output_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw InvalidInput("cannot create output directory: " + dir.string());
    return dir;
}

Dataset load_quotes(const Options& opt) {
    if (opt.quotes_path.empty()) throw InvalidInput("--quotes is required");
    const fs::path p(opt.quotes_path);
    try {
        return parse_quotes(read_file(p), p.stem().string());
    } catch (const ParseError& e) {
        throw ParseError(p.string() + ": " + e.what());
    }
}

ModelParams load_params(const Options& opt) {
    if (opt.params_path.empty()) throw InvalidInput("--params is required");
    const ModelParams params =
        params_from_json(parse_json_text(read_file(opt.params_path), opt.params_path));
    if (!opt.model.empty() && model_from_name(opt.model) != model_of(params)) {
        throw InvalidInput("--model " + opt.model + " does not match the params file (" +
                           std::string(model_name(model_of(params))) + ")");
    }
    return params;
}

// Sidecar path for a calibration core file: foo.json -> foo.timing.json.
fs::path timing_path_for(const fs::path& core) {
    fs::path p = core;
    p.replace_extension();
    p += ".timing.json";
    return p;
}

CalibrationResult load_calibration(const std::string& path, Model expected) {
    const json core = parse_json_text(read_file(path), path);
    json timing;
    const json* timing_ptr = nullptr;
    const fs::path tpath = timing_path_for(path);
    if (fs::exists(tpath)) {
        timing = parse_json_text(read_file(tpath), tpath.string());
        timing_ptr = &timing;
    }
    const CalibrationResult res = calibration_from_json(core, timing_ptr);
    if (res.model != expected) {
        throw InvalidInput(path + ": expected a " + std::string(model_name(expected)) +
                           " calibration, found " + model_name(res.model));
    }
    return res;
}

int cmd_price(const Options& opt) {
    const ModelParams params = load_params(opt);
    const Dataset ds = load_quotes(opt);
    const Model model = model_of(params);

    json out_rows = json::array();
    std::string text;
    text += "quote_id            price  intrinsic\n";
    for (const Quote& q : ds.quotes) {
        double price = 0.0;
        try {
            price = model_price(params, q.spot, q.strike, q.rate, q.tau, opt.order);
        } catch (const NumericFailure& e) {
            throw NumericFailure("pricing failed for quote '" + q.quote_id + "': " + e.what());
        }
        const double intrinsic = std::max(q.spot - q.strike * std::exp(-q.rate * q.tau), 0.0);
        const double tol = (model == Model::msv ? 1e-6 : 1e-9) * q.spot;
        const bool ok = price >= intrinsic - tol && price <= q.spot + tol;
        json row;
        row["quote_id"] = q.quote_id;
        row["price"] = price;
        row["intrinsic_ok"] = ok;
        out_rows.push_back(row);
        char buf[128];
        std::snprintf(buf, sizeof(buf), "%-12s %12.6f  %s\n", q.quote_id.c_str(), price,
                      ok ? "ok" : "VIOLATION");
        text += buf;
    }
    json doc;
    doc["model"] = model_name(model);
    doc["dataset_label"] = ds.label;
    doc["prices"] = out_rows;

    const std::string structured = dump_json(doc);
    if (opt.format == "structured") {
        std::cout << structured;
    } else {
        std::cout << text;
    }
    if (!opt.output_dir.empty()) {
        const fs::path dir = ensure_output_dir(opt);
        write_file(dir / ("prices_" + sanitize_label(ds.label) + ".json"), structured);
    }
    return 0;
}

int cmd_calibrate(const Options& opt) {
    if (opt.model.empty()) throw InvalidInput("--model is required for calibrate");
    const Dataset full = load_quotes(opt);
    Dataset fit_ds = full;
    if (!opt.no_split) fit_ds = split_in_out(full).first;

    CalibrationConfig cfg;
    cfg.model = model_from_name(opt.model);
    cfg.loss_kind = opt.loss == "rmse" ? LossKind::rmse : LossKind::sse;
    cfg.max_evals = opt.max_evals;
    cfg.n_starts = opt.starts;
    cfg.tolerance = opt.tolerance;
    cfg.seed = opt.seed;
    cfg.feller_penalty_weight = opt.feller_weight;
    cfg.msv_order = opt.order;
    cfg.validate();

    const CalibrationResult res = calibrate(fit_ds, cfg);

    const fs::path dir = ensure_output_dir(opt);
    const fs::path core_path = dir / ("calibration_" + opt.model + ".json");
    const std::string core_text = dump_json(calibration_core_json(res));
    write_file(core_path, core_text);
    write_file(timing_path_for(core_path), dump_json(calibration_timing_json(res)));

    if (opt.format == "structured") {
        std::cout << core_text;
    } else {
        std::cout << "model: " << model_name(res.model) << "\n";
        std::cout << "fitted on: " << fit_ds.label << " (" << fit_ds.quotes.size()
                  << " quotes)\n";
        std::cout << "loss (" << loss_kind_name(res.loss_kind) << "): " << res.loss << "\n";
        std::cout << "n_evals: " << res.n_evals << "\n";
        std::cout << "start_index: " << res.start_index << "\n";
        std::cout << "converged: " << (res.converged ? "yes" : "no") << "\n";
        std::cout << "elapsed_seconds: " << res.elapsed_seconds << "\n";
        std::cout << "params:\n";
        const json pj = params_to_json(res.params);
        for (auto it = pj.begin(); it != pj.end(); ++it) {
            if (it.key() == "model") continue;
            std::cout << "  " << it.key() << ": " << it.value().dump() << "\n";
        }
        std::cout << "written: " << core_path.string() << "\n";
    }
    return 0;
}

int cmd_evaluate(const Options& opt) {
    const Dataset ds = load_quotes(opt);
    if (opt.bs_calib.empty() || opt.heston_calib.empty() || opt.msv_calib.empty()) {
        throw InvalidInput("evaluate needs --bs-calib, --heston-calib, and --msv-calib");
    }
    const CalibrationResult bs_fit = load_calibration(opt.bs_calib, Model::bs);
    const CalibrationResult heston_fit = load_calibration(opt.heston_calib, Model::heston);
    const CalibrationResult msv_fit = load_calibration(opt.msv_calib, Model::msv);

    const ErrorReport rep = build_error_report(ds, bs_fit, heston_fit, msv_fit, opt.order);

    auto rows_against = [&](const ModelParams& sv) {
        std::vector<ComparisonRow> rows;
        rows.reserve(ds.quotes.size());
        for (const Quote& q : ds.quotes) {
            const double bsp =
                model_price(bs_fit.params, q.spot, q.strike, q.rate, q.tau, opt.order);
            const double svp = model_price(sv, q.spot, q.strike, q.rate, q.tau, opt.order);
            rows.push_back(make_comparison_row(q, bsp, svp));
        }
        return rows;
    };
    const std::vector<ComparisonRow> rows_heston = rows_against(heston_fit.params);
    const std::vector<ComparisonRow> rows_msv = rows_against(msv_fit.params);

    const std::vector<WorstRow> metric_rows = {
        {rep.bs.mrae_in, rep.heston.mrae_in, rep.msv.mrae_in, false},
        {rep.bs.rmse_in, rep.heston.rmse_in, rep.msv.rmse_in, false},
        {rep.bs.mrae_out, rep.heston.mrae_out, rep.msv.mrae_out, true},
        {rep.bs.rmse_out, rep.heston.rmse_out, rep.msv.rmse_out, true},
    };
    const WorstCounts counts = worst_value_counts(metric_rows);

    json doc;
    doc["report"] = report_to_json(rep);
    doc["comparison_heston"] = comparison_rows_to_json(rows_heston);
    doc["comparison_msv"] = comparison_rows_to_json(rows_msv);
    doc["worst_counts"] = worst_counts_to_json(counts);
    const std::string structured = dump_json(doc);

    const fs::path dir = ensure_output_dir(opt);
    const std::string label = sanitize_label(ds.label);
    write_file(dir / ("report_" + label + ".json"), dump_json(report_to_json(rep)));
    write_file(dir / ("comparison_heston_" + label + ".json"),
               dump_json(comparison_rows_to_json(rows_heston)));
    write_file(dir / ("comparison_msv_" + label + ".json"),
               dump_json(comparison_rows_to_json(rows_msv)));
    write_file(dir / ("worst_counts_" + label + ".json"),
               dump_json(worst_counts_to_json(counts)));

    if (opt.format == "structured") {
        std::cout << structured;
    } else {
        std::cout << render_error_report_text(rep) << "\n";
        std::cout << "comparison vs heston:\n" << render_comparison_table_text(rows_heston)
                  << "\n";
        std::cout << "comparison vs msv:\n" << render_comparison_table_text(rows_msv) << "\n";
        std::cout << "worst-value counts (in):  bs=" << counts.bs_in
                  << " heston=" << counts.heston_in << " msv=" << counts.msv_in << "\n";
        std::cout << "worst-value counts (out): bs=" << counts.bs_out
                  << " heston=" << counts.heston_out << " msv=" << counts.msv_out << "\n";
    }
    return 0;
}

int cmd_simulate(const Options& opt) {
    const ModelParams params = load_params(opt);
    if (!(opt.spot > 0.0) || !(opt.strike > 0.0) || !(opt.tau > 0.0)) {
        throw InvalidInput("simulate needs --spot > 0, --strike > 0, --tau > 0");
    }
    McConfig cfg;
    cfg.n_paths = opt.paths;
    cfg.n_steps = opt.steps;
    cfg.seed = opt.seed;
    cfg.antithetic = !opt.no_antithetic;

    json doc;
    doc["model"] = model_name(model_of(params));
    std::string text;
    char buf[256];

    if (const auto* m = std::get_if<MsvParams>(&params)) {
        const PriceResult oracle = msv_mixture_oracle(*m, opt.spot, opt.strike, opt.rate, opt.tau);
        const double closed = msv_call(*m, opt.spot, opt.strike, opt.rate, opt.tau, opt.order).price;
        const double delta = oracle.price - closed;
        const bool pass = std::fabs(delta) <= 1e-3 * std::max(std::fabs(closed), 1e-12);
        doc["method"] = "mixture";
        doc["price"] = oracle.price;
        doc["quad_nodes"] = oracle.quad_nodes;
        doc["closed_form"] = closed;
        doc["delta"] = delta;
        doc["pass"] = pass;
        std::snprintf(buf, sizeof(buf),
                      "mixture price: %.10f\nquad_nodes: %d\ntaylor price: %.10f\n"
                      "delta: %.3e\ncheck: %s (|delta| <= 1e-3 relative)\n",
                      oracle.price, oracle.quad_nodes, closed, delta, pass ? "PASS" : "FAIL");
        text = buf;
    } else {
        McEstimate est;
        double closed = 0.0;
        if (const auto* b = std::get_if<BsParams>(&params)) {
            est = mc_bs_call(*b, opt.spot, opt.strike, opt.rate, opt.tau, cfg);
            closed = bs_call(opt.spot, opt.strike, opt.rate, opt.tau, b->sigma);
        } else {
            const auto& h = std::get<HestonParams>(params);
            est = mc_heston_call(h, opt.spot, opt.strike, opt.rate, opt.tau, cfg);
            closed = heston_call(h, opt.spot, opt.strike, opt.rate, opt.tau).price;
        }
        const double delta = est.price - closed;
        const bool pass = std::fabs(delta) <= 3.0 * est.stderr_est;
        doc["method"] = "mc";
        doc["price"] = est.price;
        doc["stderr"] = est.stderr_est;
        doc["n_effective"] = est.n_effective;
        doc["closed_form"] = closed;
        doc["delta"] = delta;
        doc["pass"] = pass;
        std::snprintf(buf, sizeof(buf),
                      "mc price: %.10f\nstderr: %.3e\nn_effective: %lld\n"
                      "closed form: %.10f\ndelta: %.3e\ncheck: %s (|delta| <= 3*stderr)\n",
                      est.price, est.stderr_est, static_cast<long long>(est.n_effective),
                      closed, delta, pass ? "PASS" : "FAIL");
        text = buf;
    }

    const std::string structured = dump_json(doc);
    if (opt.format == "structured") {
        std::cout << structured;
    } else {
        std::cout << text;
    }
    if (!opt.output_dir.empty()) {
        const fs::path dir = ensure_output_dir(opt);
        write_file(dir / ("simulate_" + std::string(model_name(model_of(params))) + ".json"),
                   structured);
    }
    return 0;
}

int cmd_report(const Options& opt) {
    if (opt.report_path.empty() || opt.rows_path.empty()) {
        throw InvalidInput("report needs --report and --rows");
    }
    const ErrorReport rep =
        report_from_json(parse_json_text(read_file(opt.report_path), opt.report_path));
    const std::vector<ComparisonRow> rows =
        comparison_rows_from_json(parse_json_text(read_file(opt.rows_path), opt.rows_path));
    if (rows.empty()) {
        std::cerr << "warning: no comparison rows, nothing to draw\n";
        return 0;
    }
    const fs::path dir = ensure_output_dir(opt);
    const std::string label = sanitize_label(rep.dataset_label);
    const fs::path scatter_path = dir / (label + "_scatter.svg");
    const fs::path bars_path = dir / (label + "_error_bars.svg");
    write_file(scatter_path, scatter_svg(rows, "model vs market, " + rep.dataset_label));
    write_file(bars_path, error_bars_svg(rep));
    std::cout << "written: " << scatter_path.string() << "\n";
    std::cout << "written: " << bars_path.string() << "\n";
    return 0;
}

void add_common_output_flags(CLI::App* sub, Options& opt) {
    sub->add_option("--output-dir", opt.output_dir, "Directory for output files");
    sub->add_option("--format", opt.format, "Output format")
        ->check(CLI::IsMember({"text", "structured"}));
}

} // namespace

int main(int argc, char** argv) {
    Options opt;
    CLI::App app{"volcal: European call pricing, calibration, and model comparison\n"
                 "(Black-Scholes, Heston, MSV)"};
    app.require_subcommand(1);

    CLI::App* price = app.add_subcommand("price", "Price every quote in a CSV under one model");
    price->add_option("--model", opt.model, "Model (must match the params file)")
        ->check(CLI::IsMember({"bs", "heston", "msv"}));
    price->add_option("--params", opt.params_path, "Model parameter JSON file")->required();
    price->add_option("--quotes", opt.quotes_path, "Quote CSV file")->required();
    price->add_option("--order", opt.order, "MSV Taylor order")->check(CLI::IsMember({2, 3, 4}));
    add_common_output_flags(price, opt);

    CLI::App* calibrate_cmd =
        app.add_subcommand("calibrate", "Fit model parameters to a quote CSV");
    calibrate_cmd->add_option("--model", opt.model, "Model to calibrate")
        ->check(CLI::IsMember({"bs", "heston", "msv"}))
        ->required();
    calibrate_cmd->add_option("--quotes", opt.quotes_path, "Quote CSV file")->required();
    calibrate_cmd->add_option("--seed", opt.seed, "Start-point jitter seed");
    calibrate_cmd->add_option("--starts", opt.starts, "Number of multi-starts");
    calibrate_cmd->add_option("--max-evals", opt.max_evals, "Objective budget per start");
    calibrate_cmd->add_option("--order", opt.order, "MSV Taylor order")
        ->check(CLI::IsMember({2, 3, 4}));
    calibrate_cmd->add_option("--loss", opt.loss, "Loss kind")
        ->check(CLI::IsMember({"sse", "rmse"}));
    calibrate_cmd->add_option("--feller-weight", opt.feller_weight,
                              "Soft Feller penalty weight (Heston)");
    calibrate_cmd->add_option("--tolerance", opt.tolerance, "Simplex loss-spread stop");
    calibrate_cmd->add_flag("--no-split", opt.no_split,
                            "Fit on all quotes instead of the in-sample half");
    add_common_output_flags(calibrate_cmd, opt);

    CLI::App* evaluate_cmd = app.add_subcommand(
        "evaluate", "Error report, per-quote comparisons, and worst-value counts");
    evaluate_cmd->add_option("--quotes", opt.quotes_path, "Quote CSV file")->required();
    evaluate_cmd->add_option("--bs-calib", opt.bs_calib, "BS calibration JSON")->required();
    evaluate_cmd->add_option("--heston-calib", opt.heston_calib, "Heston calibration JSON")
        ->required();
    evaluate_cmd->add_option("--msv-calib", opt.msv_calib, "MSV calibration JSON")->required();
    evaluate_cmd->add_option("--order", opt.order, "MSV Taylor order")
        ->check(CLI::IsMember({2, 3, 4}));
    add_common_output_flags(evaluate_cmd, opt);

    CLI::App* simulate_cmd = app.add_subcommand(
        "simulate", "Independent oracle price (Monte Carlo or MSV mixture quadrature)");
    simulate_cmd->add_option("--model", opt.model, "Model (must match the params file)")
        ->check(CLI::IsMember({"bs", "heston", "msv"}));
    simulate_cmd->add_option("--params", opt.params_path, "Model parameter JSON file")
        ->required();
    simulate_cmd->add_option("--spot", opt.spot, "Spot price")->required();
    simulate_cmd->add_option("--strike", opt.strike, "Strike")->required();
    simulate_cmd->add_option("--rate", opt.rate, "Risk-free rate");
    simulate_cmd->add_option("--tau", opt.tau, "Time to expiry in years")->required();
    simulate_cmd->add_option("--paths", opt.paths, "Monte Carlo paths");
    simulate_cmd->add_option("--steps", opt.steps, "Time steps per year");
    simulate_cmd->add_option("--seed", opt.seed, "RNG seed");
    simulate_cmd->add_option("--order", opt.order, "MSV Taylor order")
        ->check(CLI::IsMember({2, 3, 4}));
    simulate_cmd->add_flag("--no-antithetic", opt.no_antithetic, "Disable antithetic pairs");
    add_common_output_flags(simulate_cmd, opt);

    CLI::App* report_cmd =
        app.add_subcommand("report", "Render SVG charts from evaluation outputs");
    report_cmd->add_option("--report", opt.report_path, "Error report JSON")->required();
    report_cmd->add_option("--rows", opt.rows_path, "Comparison rows JSON")->required();
    add_common_output_flags(report_cmd, opt);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (price->parsed()) return cmd_price(opt);
        if (calibrate_cmd->parsed()) return cmd_calibrate(opt);
        if (evaluate_cmd->parsed()) return cmd_evaluate(opt);
        if (simulate_cmd->parsed()) return cmd_simulate(opt);
        if (report_cmd->parsed()) return cmd_report(opt);
        std::cerr << "error: no subcommand\n";
        return 2;
    } catch (const NumericFailure& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const CalibrationFailure& e) {
        std::cerr << "calibration failure: " << e.what() << "\n";
        return 4;
    } catch (const ParseError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 2;
    } catch (const InvalidInput& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
