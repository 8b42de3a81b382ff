#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "sau/checkpoint.hpp"
#include "sau/config.hpp"
#include "sau/dataset.hpp"
#include "sau/errors.hpp"
#include "sau/eval.hpp"
#include "sau/model.hpp"
#include "sau/pruning.hpp"
#include "sau/rng.hpp"
#include "sau/saliency.hpp"
#include "sau/sau_plan.hpp"
#include "sau/theory.hpp"
#include "sau/unlearner.hpp"

namespace {

using ordered_json = nlohmann::ordered_json;
using namespace sau;

// Exit codes, also documented in the README:
//   0 success, 2 usage, 3 invalid config/contract, 4 plan/mask hash mismatch,
//   5 I/O or corrupt checkpoint, 6 runtime failure (divergence, generation),
//   7 internal error.
constexpr int kExitUsage = 2;
constexpr int kExitConfig = 3;
constexpr int kExitHashMismatch = 4;
constexpr int kExitIo = 5;
constexpr int kExitRuntime = 6;
constexpr int kExitInternal = 7;

void write_text_atomic(const std::string& path, const std::string& text) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw IoError("cannot open for writing: " + tmp);
        }
        out << text;
        if (!out) {
            throw IoError("write failed: " + tmp);
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        throw IoError("rename failed: " + path + ": " + ec.message());
    }
}

ExperimentConfig load_config_or_default(const std::string& path) {
    if (path.empty()) {
        ExperimentConfig cfg;
        cfg.validate();
        return cfg;
    }
    return ExperimentConfig::from_json_file(path);
}

Model train_base_model(const ExperimentConfig& cfg, const FactDataset& ds) {
    Model model = Model::init(cfg.model_config());
    const auto trace = train(model, ds, cfg.train_config());
    std::cerr << "trained base model: initial loss " << trace.front() << ", final loss "
              << trace.back() << "\n";
    return model;
}

// The sweep/resurface/ablate subcommands regenerate their dataset and base
// model from the config; the pipeline subcommands work from checkpoints.
struct Workbench {
    FactDataset dataset;
    Model model;
};

Workbench build_workbench(const ExperimentConfig& cfg) {
    FactDataset ds = gen_facts(cfg.n_facts, cfg.vocab, cfg.key_len, cfg.val_len,
                               cfg.forget_fraction, cfg.data_seed);
    Model model = train_base_model(cfg, ds);
    return Workbench{std::move(ds), std::move(model)};
}

std::vector<SweepRow> rows_from_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open: " + path);
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw IoError("empty csv: " + path);
    }
    std::vector<SweepRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        std::istringstream ls(line);
        std::string field;
        std::vector<std::string> fields;
        while (std::getline(ls, field, ',')) {
            fields.push_back(field);
        }
        if (fields.size() != 13) {
            throw IoError("malformed csv row: " + line);
        }
        SweepRow row;
        row.key.pruner = fields[0];
        row.key.sparsity = std::stod(fields[1]);
        row.key.variant = variant_from_name(fields[2]);
        row.key.topk = std::stod(fields[3]);
        row.key.alpha = std::stod(fields[4]);
        row.key.seed = std::stoull(fields[5]);
        row.scores.forget_quality = std::stod(fields[6]);
        row.scores.utility = std::stod(fields[7]);
        row.scores.aggregate = std::stod(fields[8]);
        row.scores.forget_em = std::stod(fields[9]);
        row.scores.retain_em = std::stod(fields[10]);
        row.epochs = std::stoi(fields[11]);
        row.wall_ms = std::stoll(fields[12]);
        rows.push_back(row);
    }
    return rows;
}

// Theorem, compensation and capacity checks on seeded instances; exit 0 iff
// every invariant holds.
std::pair<std::string, bool> run_theory_verification(std::uint64_t seed) {
    bool pass = true;
    ordered_json j;
    j["seed"] = seed;
    const std::vector<double> eps_list = {1e-1, 5e-2, 2.5e-2, 1.25e-2};
    j["eps_schedule"] = eps_list;
    j["theorem"] = ordered_json::array();
    for (int t = 0; t < 10; ++t) {
        const std::uint64_t toy_seed = Rng::derive(seed, "toy" + std::to_string(t));
        SoftmaxToy toy = SoftmaxToy::seeded(6, 3, toy_seed);
        Rng rng(Rng::derive(toy_seed, "direction"));
        std::vector<double> theta(static_cast<std::size_t>(toy.n_inputs));
        std::vector<double> dir(static_cast<std::size_t>(toy.n_inputs));
        for (auto& v : theta) {
            v = rng.next_normal(0.5);
        }
        double norm = 0.0;
        for (auto& v : dir) {
            v = rng.next_normal();
            norm += v * v;
        }
        norm = std::sqrt(norm);
        for (auto& v : dir) {
            v /= norm;
        }
        const TheoremReport report = verify_theorem(toy, theta, dir, eps_list);
        const bool ok = report.monotone && report.final_rel_err < 0.05;
        pass = pass && ok;
        j["theorem"].push_back({{"toy_seed", toy_seed},
                                {"monotone", report.monotone},
                                {"final_rel_err", report.final_rel_err},
                                {"pass", ok},
                                {"report", ordered_json::parse(report.to_json())}});
    }

    // Compensation identity on random instances; exact expansion must hold to
    // 1e-10 and the uniform simplification must hold exactly under uniform
    // survivor Fisher.
    Rng rng(Rng::derive(seed, "compensation"));
    double max_exact_err = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const auto n = 4 + static_cast<std::int64_t>(rng.next_index(61));
        Tensor fisher = Tensor::zeros({n});
        Tensor mask = Tensor::zeros({n});
        bool any = false;
        for (std::int64_t k = 0; k < n; ++k) {
            const double u = rng.next_u01();
            fisher.at(k) = u * u * 4.0;
            mask.at(k) = rng.next_u01() < 0.5 ? 1.0 : 0.0;
            any = any || mask.at(k) != 0.0;
        }
        if (!any) {
            mask.at(0) = 1.0;
        }
        const double alpha = rng.next_u01();
        const CompensationReport rep = verify_compensation(fisher, mask, alpha);
        max_exact_err = std::max(max_exact_err, rep.abs_err_exact);
    }
    const bool comp_ok = max_exact_err < 1e-10;
    pass = pass && comp_ok;
    j["compensation"] = {{"instances", 1000},
                         {"max_abs_err_exact_expansion", max_exact_err},
                         {"pass", comp_ok}};

    // Uniform-Fisher capacity loss equals the sparsity ratio exactly.
    {
        Tensor fisher = Tensor::full({100}, 0.7);
        Tensor mask = Tensor::full({100}, 1.0);
        for (std::int64_t i = 0; i < 25; ++i) {
            mask.at(i * 4) = 0.0;
        }
        const double cl = capacity_loss(fisher.data, mask.data);
        const bool cap_ok = cl == 0.25;
        pass = pass && cap_ok;
        j["capacity_uniform"] = {{"expected", 0.25}, {"actual", cl}, {"pass", cap_ok}};
    }
    j["pass"] = pass;
    return {j.dump(2) + "\n", pass};
}

int dispatch(int argc, char** argv) {
    CLI::App app{"Sparsity-aware unlearning toolkit"};
    app.require_subcommand(1);

    // gen-data
    auto* gen = app.add_subcommand("gen-data", "Generate a fact dataset");
    std::string gen_out = "data.txt";
    ExperimentConfig gen_cfg;
    gen->add_option("--out", gen_out, "Output dataset path");
    gen->add_option("--n-facts", gen_cfg.n_facts);
    gen->add_option("--vocab", gen_cfg.vocab);
    gen->add_option("--key-len", gen_cfg.key_len);
    gen->add_option("--val-len", gen_cfg.val_len);
    gen->add_option("--forget-fraction", gen_cfg.forget_fraction);
    gen->add_option("--seed", gen_cfg.data_seed);

    // train
    auto* tr = app.add_subcommand("train", "Train a model to memorize a dataset");
    std::string tr_data = "data.txt", tr_out = "model.ckpt";
    ExperimentConfig tr_cfg;
    tr->add_option("--data", tr_data)->required();
    tr->add_option("--out", tr_out);
    tr->add_option("--arch", tr_cfg.arch);
    tr->add_option("--widths", tr_cfg.widths)->delimiter(',');
    tr->add_option("--context-len", tr_cfg.context_len);
    tr->add_option("--model-seed", tr_cfg.model_seed);
    tr->add_option("--lr", tr_cfg.train_lr);
    tr->add_option("--epochs", tr_cfg.train_epochs);
    tr->add_option("--batch", tr_cfg.train_batch);
    tr->add_option("--train-seed", tr_cfg.train_seed);

    // prune
    auto* pr = app.add_subcommand("prune", "Prune a model and store params + mask");
    std::string pr_model, pr_data, pr_out = "pruned.ckpt", pr_method = "magnitude";
    double pr_sparsity = 0.5;
    int pr_calib = 32;
    pr->add_option("--model", pr_model)->required();
    pr->add_option("--data", pr_data, "Needed for activation pruning calibration");
    pr->add_option("--method", pr_method, "magnitude | activation");
    pr->add_option("--sparsity", pr_sparsity);
    pr->add_option("--calib-facts", pr_calib);
    pr->add_option("--out", pr_out);

    // saliency
    auto* sal = app.add_subcommand("saliency", "Forget-set saliency of a model");
    std::string sal_model, sal_data, sal_out = "saliency.ckpt";
    int sal_batch = 1;
    sal->add_option("--model", sal_model)->required();
    sal->add_option("--data", sal_data)->required();
    sal->add_option("--batch-size", sal_batch);
    sal->add_option("--out", sal_out);

    // plan
    auto* pl = app.add_subcommand("plan", "Build the gradient mask / redistribution plan");
    std::string pl_saliency, pl_mask, pl_out = "plan.ckpt";
    double pl_topk = 0.3, pl_alpha = 0.1;
    pl->add_option("--saliency", pl_saliency)->required();
    pl->add_option("--mask", pl_mask, "Checkpoint holding the sparsity mask")->required();
    pl->add_option("--topk", pl_topk);
    pl->add_option("--alpha", pl_alpha);
    pl->add_option("--out", pl_out);

    // unlearn
    auto* ul = app.add_subcommand("unlearn", "Run gradient-difference unlearning");
    std::string ul_model, ul_plan, ul_data, ul_out = "unlearned.ckpt";
    std::string ul_manifest = "manifest.json", ul_metrics = "metrics.csv";
    std::string ul_variant = "baseline";
    UnlearnConfig ul_cfg;
    ul->add_option("--model", ul_model)->required();
    ul->add_option("--data", ul_data)->required();
    ul->add_option("--plan", ul_plan, "Required for the sau variant");
    ul->add_option("--variant", ul_variant, "baseline | sau");
    ul->add_option("--eta", ul_cfg.eta);
    ul->add_option("--lambda", ul_cfg.lambda);
    ul->add_option("--epochs", ul_cfg.epochs);
    ul->add_option("--batch-forget", ul_cfg.batch_forget);
    ul->add_option("--batch-retain", ul_cfg.batch_retain);
    ul->add_option("--seed", ul_cfg.seed);
    ul->add_option("--out", ul_out);
    ul->add_option("--manifest", ul_manifest);
    ul->add_option("--metrics", ul_metrics);

    // eval
    auto* ev = app.add_subcommand("eval", "Score a model on both splits");
    std::string ev_model, ev_data, ev_out = "score.json";
    ev->add_option("--model", ev_model)->required();
    ev->add_option("--data", ev_data)->required();
    ev->add_option("--out", ev_out);

    // sweep
    auto* sw = app.add_subcommand("sweep", "Sparsity sweep over variants and seeds");
    std::string sw_config, sw_dir = "sweep_out";
    sw->add_option("--config", sw_config, "Experiment config JSON");
    sw->add_option("--out-dir", sw_dir);

    // resurface
    auto* rs = app.add_subcommand("resurface", "Two-arm resurfacing experiment");
    std::string rs_config, rs_out = "resurfacing.json";
    rs->add_option("--config", rs_config);
    rs->add_option("--out", rs_out);

    // ablate
    auto* ab = app.add_subcommand("ablate", "Top-k or redistribution ablation");
    std::string ab_config, ab_mode = "topk", ab_dir = "ablation_out";
    std::vector<double> ab_klist = {0.1, 0.3, 0.5};
    ab->add_option("--config", ab_config);
    ab->add_option("--mode", ab_mode, "topk | redistribution");
    ab->add_option("--k-list", ab_klist)->delimiter(',');
    ab->add_option("--out-dir", ab_dir);

    // verify-theory
    auto* vt = app.add_subcommand("verify-theory", "Numerical checks of the Fisher theory");
    std::uint64_t vt_seed = 7;
    std::string vt_out = "theory_report.json";
    vt->add_option("--seed", vt_seed);
    vt->add_option("--out", vt_out);

    // report
    auto* rp = app.add_subcommand("report", "Re-render an SVG chart from a sweep CSV");
    std::string rp_csv, rp_out = "chart.svg";
    rp->add_option("--csv", rp_csv)->required();
    rp->add_option("--out", rp_out);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);  // prints help or the parse error
        return rc == 0 ? 0 : kExitUsage;
    }

    if (gen->parsed()) {
        const FactDataset ds = gen_facts(gen_cfg.n_facts, gen_cfg.vocab, gen_cfg.key_len,
                                         gen_cfg.val_len, gen_cfg.forget_fraction,
                                         gen_cfg.data_seed);
        std::ostringstream buf;
        save_dataset(ds, gen_out);
        std::cerr << "wrote " << gen_out << " (" << ds.facts.size() << " facts, "
                  << ds.forget_ids.size() << " forget)\n";
        return 0;
    }

    if (tr->parsed()) {
        const FactDataset ds = load_dataset(tr_data);
        tr_cfg.vocab = ds.vocab;
        if (tr_cfg.context_len < ds.max_sequence_len()) {
            tr_cfg.context_len = ds.max_sequence_len();
        }
        Model model = Model::init(tr_cfg.model_config());
        const auto trace = train(model, ds, tr_cfg.train_config());
        CheckpointBundle bundle;
        bundle.model_config = model.config();
        bundle.params = model.params();
        save_bundle(tr_out, bundle);
        const ScoreCard s = score(model, ds);
        std::cerr << "final loss " << trace.back() << ", forget EM " << s.forget_em
                  << ", retain EM " << s.retain_em << "\n";
        return 0;
    }

    if (pr->parsed()) {
        Model model = load_model(pr_model);
        SparsityMask mask;
        if (pr_method == "magnitude") {
            mask = magnitude_prune(model.params(), pr_sparsity);
        } else if (pr_method == "activation") {
            if (pr_data.empty()) {
                throw ConfigError("data: activation pruning needs --data for calibration");
            }
            const FactDataset ds = load_dataset(pr_data);
            std::vector<Fact> retain = ds.retain_facts();
            const auto n = std::min<std::size_t>(retain.size(),
                                                 static_cast<std::size_t>(pr_calib));
            std::vector<Fact> calib(retain.begin(),
                                    retain.begin() + static_cast<std::ptrdiff_t>(n));
            mask = activation_prune(model.params(), model.activation_rms(calib), pr_sparsity);
        } else {
            throw ConfigError("method: must be 'magnitude' or 'activation'");
        }
        model.set_params(apply_mask(model.params(), mask));
        CheckpointBundle bundle;
        bundle.model_config = model.config();
        bundle.params = model.params();
        bundle.mask = mask;
        save_bundle(pr_out, bundle);
        std::cerr << "pruned at s=" << pr_sparsity << " (achieved " << sparsity_of(mask)
                  << "), wrote " << pr_out << "\n";
        return 0;
    }

    if (sal->parsed()) {
        const Model model = load_model(sal_model);
        const FactDataset ds = load_dataset(sal_data);
        const SaliencyMap map = compute_saliency(model, ds.forget_facts(), sal_batch);
        CheckpointBundle bundle;
        bundle.saliency = map;
        save_bundle(sal_out, bundle);
        std::cerr << "saliency over " << map.sample_count << " forget facts, wrote " << sal_out
                  << "\n";
        return 0;
    }

    if (pl->parsed()) {
        const CheckpointBundle sal_bundle = load_bundle(pl_saliency);
        if (!sal_bundle.saliency) {
            throw IoError("checkpoint has no saliency section: " + pl_saliency);
        }
        const CheckpointBundle mask_bundle = load_bundle(pl_mask);
        if (!mask_bundle.mask) {
            throw IoError("checkpoint has no mask section: " + pl_mask);
        }
        SAUConfig cfg;
        cfg.topk_ratio = pl_topk;
        cfg.alpha = pl_alpha;
        const SAUPlan plan = build_plan(*sal_bundle.saliency, *mask_bundle.mask, cfg);
        CheckpointBundle bundle;
        bundle.plan = plan;
        save_bundle(pl_out, bundle);
        std::cerr << "plan with k=" << pl_topk << ", alpha=" << pl_alpha << ", wrote " << pl_out
                  << "\n";
        return 0;
    }

    if (ul->parsed()) {
        const CheckpointBundle model_bundle = load_bundle(ul_model);
        if (!model_bundle.model_config || !model_bundle.params || !model_bundle.mask) {
            throw IoError("unlearn needs a checkpoint with params and mask: " + ul_model);
        }
        Model model = Model::init(*model_bundle.model_config);
        model.set_params(*model_bundle.params);
        ul_cfg.variant = variant_from_name(ul_variant);
        std::optional<SAUPlan> plan;
        if (!ul_plan.empty()) {
            CheckpointBundle plan_bundle = load_bundle(ul_plan);
            if (!plan_bundle.plan) {
                throw IoError("checkpoint has no plan section: " + ul_plan);
            }
            plan = std::move(*plan_bundle.plan);
        }
        if (ul_cfg.variant == Variant::sau && !plan) {
            throw ConfigError("plan: the sau variant requires --plan");
        }
        const FactDataset ds = load_dataset(ul_data);
        const auto t0 = std::chrono::steady_clock::now();
        RunManifest manifest =
            run_unlearning(model, *model_bundle.mask, plan ? &*plan : nullptr, ds, ul_cfg);
        const auto t1 = std::chrono::steady_clock::now();
        CheckpointBundle out_bundle;
        out_bundle.model_config = model.config();
        out_bundle.params = model.params();
        out_bundle.mask = *model_bundle.mask;
        save_bundle(ul_out, out_bundle);
        write_text_atomic(ul_manifest, manifest.to_json());
        write_text_atomic(ul_metrics, manifest.metrics_csv());
        std::cerr << "unlearned in "
                  << std::chrono::duration_cast<std::chrono::milliseconds>(t1 - t0).count()
                  << " ms; forget EM " << manifest.final().forget_em << ", retain EM "
                  << manifest.final().retain_em << "\n";
        return 0;
    }

    if (ev->parsed()) {
        const Model model = load_model(ev_model);
        const FactDataset ds = load_dataset(ev_data);
        const ScoreCard s = score(model, ds);
        ordered_json j;
        j["forget_quality"] = s.forget_quality;
        j["utility"] = s.utility;
        j["aggregate"] = s.aggregate;
        j["forget_em"] = s.forget_em;
        j["retain_em"] = s.retain_em;
        write_text_atomic(ev_out, j.dump(2) + "\n");
        std::cerr << "aggregate " << s.aggregate << "\n";
        return 0;
    }

    if (sw->parsed()) {
        const ExperimentConfig cfg = load_config_or_default(sw_config);
        Workbench wb = build_workbench(cfg);
        const SweepSpec spec = cfg.sweep_spec();
        const SweepResult result = sparsity_sweep(wb.model, wb.dataset, spec);
        std::filesystem::create_directories(sw_dir);
        write_text_atomic(sw_dir + "/sweep.csv", sweep_csv(result));
        write_text_atomic(sw_dir + "/sweep.svg", sweep_svg(result));
        write_text_atomic(sw_dir + "/summary.json", sweep_summary_json(spec, result));
        std::cerr << "sweep complete: " << result.cells.size() << " cells, "
                  << result.failures.size() << " failures, outputs in " << sw_dir << "\n";
        return 0;
    }

    if (rs->parsed()) {
        const ExperimentConfig cfg = load_config_or_default(rs_config);
        Workbench wb = build_workbench(cfg);
        const ResurfacingReport report = resurfacing_experiment(
            wb.model, wb.dataset, cfg.pruner, cfg.sparsity, cfg.unlearn_config(),
            cfg.calib_facts);
        write_text_atomic(rs_out, report.to_json());
        std::cerr << "resurfacing delta forget EM " << report.delta_forget_em << ", wrote "
                  << rs_out << "\n";
        return 0;
    }

    if (ab->parsed()) {
        const ExperimentConfig cfg = load_config_or_default(ab_config);
        Workbench wb = build_workbench(cfg);
        const SweepSpec spec = cfg.sweep_spec();
        SweepResult result;
        if (ab_mode == "topk") {
            result = ablation_topk(wb.model, wb.dataset, spec, cfg.sparsity, ab_klist);
        } else if (ab_mode == "redistribution") {
            result = ablation_redistribution(wb.model, wb.dataset, spec, cfg.sparsity);
        } else {
            throw ConfigError("mode: must be 'topk' or 'redistribution'");
        }
        std::filesystem::create_directories(ab_dir);
        write_text_atomic(ab_dir + "/ablation_" + ab_mode + ".csv", sweep_csv(result));
        write_text_atomic(ab_dir + "/ablation_" + ab_mode + "_summary.json",
                          sweep_summary_json(spec, result));
        std::cerr << "ablation (" << ab_mode << "): " << result.cells.size() << " cells\n";
        return 0;
    }

    if (vt->parsed()) {
        const auto [report, pass] = run_theory_verification(vt_seed);
        write_text_atomic(vt_out, report);
        std::cerr << (pass ? "theory checks passed\n" : "theory checks FAILED\n");
        return pass ? 0 : kExitRuntime;
    }

    if (rp->parsed()) {
        SweepResult result;
        for (const auto& row : rows_from_csv(rp_csv)) {
            SweepCell cell;
            cell.row = row;
            result.cells.push_back(std::move(cell));
        }
        write_text_atomic(rp_out, sweep_svg(result));
        std::cerr << "wrote " << rp_out << "\n";
        return 0;
    }

    return kExitUsage;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return dispatch(argc, argv);
    } catch (const HashMismatchError& e) {
        std::cerr << "error code=hash-mismatch exit=" << kExitHashMismatch << " msg=\""
                  << e.what() << "\"\n";
        return kExitHashMismatch;
    } catch (const ConfigError& e) {
        std::cerr << "error code=invalid-config exit=" << kExitConfig << " msg=\"" << e.what()
                  << "\"\n";
        return kExitConfig;
    } catch (const ContractError& e) {
        std::cerr << "error code=contract exit=" << kExitConfig << " msg=\"" << e.what()
                  << "\"\n";
        return kExitConfig;
    } catch (const CorruptCheckpointError& e) {
        std::cerr << "error code=corrupt-checkpoint exit=" << kExitIo << " msg=\"" << e.what()
                  << "\"\n";
        return kExitIo;
    } catch (const VersionError& e) {
        std::cerr << "error code=unknown-version exit=" << kExitIo << " msg=\"" << e.what()
                  << "\"\n";
        return kExitIo;
    } catch (const IoError& e) {
        std::cerr << "error code=io exit=" << kExitIo << " msg=\"" << e.what() << "\"\n";
        return kExitIo;
    } catch (const TrainingError& e) {
        std::cerr << "error code=training exit=" << kExitRuntime << " msg=\"" << e.what()
                  << "\"\n";
        return kExitRuntime;
    } catch (const UnlearningError& e) {
        std::cerr << "error code=unlearning exit=" << kExitRuntime << " msg=\"" << e.what()
                  << "\"\n";
        return kExitRuntime;
    } catch (const GenerationError& e) {
        std::cerr << "error code=generation exit=" << kExitRuntime << " msg=\"" << e.what()
                  << "\"\n";
        return kExitRuntime;
    } catch (const std::exception& e) {
        std::cerr << "error code=internal exit=" << kExitInternal << " msg=\"" << e.what()
                  << "\"\n";
        return kExitInternal;
    }
}
