#include "sau/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <future>
#include <map>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "sau/errors.hpp"
#include "sau/rng.hpp"
#include "sau/saliency.hpp"

namespace sau {

namespace {
using ordered_json = nlohmann::ordered_json;

std::string num(double v) { return ordered_json(v).dump(); }

std::string fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}
}  // namespace

double harmonic_mean(double a, double b) {
    if (a <= 0.0 || b <= 0.0) {
        return 0.0;
    }
    return 2.0 * a * b / (a + b);
}

ScoreCard score_from(double forget_em, double retain_em) {
    ScoreCard s;
    s.forget_em = forget_em;
    s.retain_em = retain_em;
    s.forget_quality = 1.0 - forget_em;
    s.utility = retain_em;
    s.aggregate = harmonic_mean(s.forget_quality, s.utility);
    return s;
}

ScoreCard score(const Model& model, const FactDataset& dataset) {
    const double em_f = model.exact_match(dataset.forget_facts()).value;
    const double em_r = model.exact_match(dataset.retain_facts()).value;
    return score_from(em_f, em_r);
}

std::string CellKey::tag() const {
    std::ostringstream out;
    out << "cell|pruner=" << pruner << "|s=" << num(sparsity)
        << "|variant=" << variant_name(variant) << "|topk=" << num(topk)
        << "|alpha=" << num(alpha) << "|seed=" << seed;
    return out.str();
}

namespace {

SparsityMask prune_with(const Model& model, const FactDataset& dataset,
                        const std::string& pruner, double sparsity, int calib_facts) {
    if (pruner == "magnitude") {
        return magnitude_prune(model.params(), sparsity);
    }
    if (pruner == "activation") {
        std::vector<Fact> retain = dataset.retain_facts();
        const auto n = std::min<std::size_t>(retain.size(),
                                             static_cast<std::size_t>(std::max(1, calib_facts)));
        std::vector<Fact> calib(retain.begin(), retain.begin() + static_cast<std::ptrdiff_t>(n));
        return activation_prune(model.params(), model.activation_rms(calib), sparsity);
    }
    throw ConfigError("pruner: unknown pruner '" + pruner + "'");
}

}  // namespace

SweepCell run_cell(const Model& base, const FactDataset& dataset, const CellKey& key,
                   const SAUConfig& sau_cfg, const UnlearnConfig& unlearn, int saliency_batch,
                   int calib_facts) {
    Model model = base;
    SparsityMask mask = prune_with(model, dataset, key.pruner, key.sparsity, calib_facts);
    model.set_params(apply_mask(model.params(), mask));

    SAUConfig cell_sau = sau_cfg;
    cell_sau.topk_ratio = key.topk;
    cell_sau.alpha = key.alpha;

    std::optional<SAUPlan> plan;
    if (key.variant == Variant::sau) {
        const SaliencyMap saliency =
            compute_saliency(model, dataset.forget_facts(), saliency_batch);
        plan = build_plan(saliency, mask, cell_sau);
    }

    UnlearnConfig cell_cfg = unlearn;
    cell_cfg.variant = key.variant;
    cell_cfg.seed = Rng::derive(key.seed, key.tag());

    SweepCell cell;
    cell.manifest =
        run_unlearning(model, mask, plan ? &*plan : nullptr, dataset, cell_cfg);
    cell.row.key = key;
    cell.row.scores = score(model, dataset);
    cell.row.epochs = cell_cfg.epochs;
    cell.row.wall_ms = 0;
    return cell;
}

namespace {

SweepResult run_cells(const Model& base, const FactDataset& dataset,
                      const std::vector<CellKey>& keys, const SweepSpec& spec) {
    SweepResult result;
    const int threads = spec.threads > 0
                            ? spec.threads
                            : std::max(1u, std::thread::hardware_concurrency());
    std::vector<std::optional<SweepCell>> slots(keys.size());
    std::vector<std::string> errors(keys.size());
    for (std::size_t start = 0; start < keys.size(); start += static_cast<std::size_t>(threads)) {
        const std::size_t end =
            std::min(keys.size(), start + static_cast<std::size_t>(threads));
        std::vector<std::future<void>> futs;
        for (std::size_t i = start; i < end; ++i) {
            futs.push_back(std::async(std::launch::async, [&, i] {
                try {
                    slots[i] = run_cell(base, dataset, keys[i], spec.sau, spec.unlearn,
                                        spec.saliency_batch, spec.calib_facts);
                } catch (const std::exception& e) {
                    errors[i] = keys[i].tag() + ": " + e.what();
                }
            }));
        }
        for (auto& f : futs) {
            f.get();
        }
    }
    for (std::size_t i = 0; i < keys.size(); ++i) {
        if (slots[i]) {
            result.cells.push_back(std::move(*slots[i]));
        } else {
            result.failures.push_back(errors[i]);
        }
    }
    return result;
}

}  // namespace

SweepResult sparsity_sweep(const Model& base, const FactDataset& dataset,
                           const SweepSpec& spec) {
    if (spec.seeds.empty()) {
        throw ConfigError("seeds: must not be empty");
    }
    for (double s : spec.sparsities) {
        if (!(s >= 0.0 && s < 1.0)) {
            throw ConfigError("sparsity_list: values must be in [0, 1)");
        }
    }
    std::vector<CellKey> keys;
    for (double s : spec.sparsities) {
        for (Variant v : spec.variants) {
            for (std::uint64_t seed : spec.seeds) {
                CellKey key;
                key.pruner = spec.pruner;
                key.sparsity = s;
                key.variant = v;
                key.topk = spec.sau.topk_ratio;
                key.alpha = spec.sau.alpha;
                key.seed = seed;
                keys.push_back(key);
            }
        }
    }
    return run_cells(base, dataset, keys, spec);
}

SweepResult ablation_topk(const Model& base, const FactDataset& dataset, const SweepSpec& spec,
                          double sparsity, const std::vector<double>& k_list) {
    std::vector<CellKey> keys;
    for (double k : k_list) {
        if (!(k > 0.0 && k <= 1.0)) {
            throw ConfigError("k_list: values must be in (0, 1]");
        }
        for (std::uint64_t seed : spec.seeds) {
            CellKey key;
            key.pruner = spec.pruner;
            key.sparsity = sparsity;
            key.variant = Variant::sau;
            key.topk = k;
            key.alpha = spec.sau.alpha;
            key.seed = seed;
            keys.push_back(key);
        }
    }
    return run_cells(base, dataset, keys, spec);
}

SweepResult ablation_redistribution(const Model& base, const FactDataset& dataset,
                                    const SweepSpec& spec, double sparsity) {
    std::vector<CellKey> keys;
    for (double alpha : {0.0, spec.sau.alpha}) {
        for (std::uint64_t seed : spec.seeds) {
            CellKey key;
            key.pruner = spec.pruner;
            key.sparsity = sparsity;
            key.variant = Variant::sau;
            key.topk = spec.sau.topk_ratio;
            key.alpha = alpha;
            key.seed = seed;
            keys.push_back(key);
        }
    }
    return run_cells(base, dataset, keys, spec);
}

ResurfacingReport resurfacing_experiment(const Model& base, const FactDataset& dataset,
                                         const std::string& pruner, double sparsity,
                                         const UnlearnConfig& unlearn, int calib_facts) {
    if (!(sparsity >= 0.0 && sparsity < 1.0)) {
        throw ConfigError("sparsity: must be in [0, 1)");
    }
    ResurfacingReport report;
    report.pruner = pruner;
    report.sparsity = sparsity;

    // Main arm: GradDiff on the dense model, then prune the unlearned model.
    Model unlearned = base;
    SparsityMask dense_mask = magnitude_prune(unlearned.params(), 0.0);
    UnlearnConfig cfg = unlearn;
    cfg.variant = Variant::baseline;
    (void)run_unlearning(unlearned, dense_mask, nullptr, dataset, cfg);
    report.unlearned_forget_em_before = unlearned.exact_match(dataset.forget_facts()).value;
    report.unlearned_retain_em_before = unlearned.exact_match(dataset.retain_facts()).value;

    SparsityMask prune_mask = prune_with(unlearned, dataset, pruner, sparsity, calib_facts);
    unlearned.set_params(apply_mask(unlearned.params(), prune_mask));
    report.unlearned_forget_em_after = unlearned.exact_match(dataset.forget_facts()).value;
    report.unlearned_retain_em_after = unlearned.exact_match(dataset.retain_facts()).value;
    report.delta_forget_em =
        report.unlearned_forget_em_after - report.unlearned_forget_em_before;
    report.delta_retain_em =
        report.unlearned_retain_em_after - report.unlearned_retain_em_before;

    // Control arm: prune the memorized model without unlearning.
    Model control = base;
    report.control_forget_em_before = control.exact_match(dataset.forget_facts()).value;
    report.control_retain_em_before = control.exact_match(dataset.retain_facts()).value;
    SparsityMask control_mask = prune_with(control, dataset, pruner, sparsity, calib_facts);
    control.set_params(apply_mask(control.params(), control_mask));
    report.control_forget_em_after = control.exact_match(dataset.forget_facts()).value;
    report.control_retain_em_after = control.exact_match(dataset.retain_facts()).value;
    return report;
}

double SweepResult::mean_aggregate(double sparsity, Variant variant) const {
    double sum = 0.0;
    int n = 0;
    for (const auto& c : cells) {
        if (c.row.key.sparsity == sparsity && c.row.key.variant == variant) {
            sum += c.row.scores.aggregate;
            ++n;
        }
    }
    if (n == 0) {
        throw ContractError("mean_aggregate: no cells match");
    }
    return sum / n;
}

double SweepResult::stdev_aggregate(double sparsity, Variant variant) const {
    const double mean = mean_aggregate(sparsity, variant);
    double ss = 0.0;
    int n = 0;
    for (const auto& c : cells) {
        if (c.row.key.sparsity == sparsity && c.row.key.variant == variant) {
            ss += (c.row.scores.aggregate - mean) * (c.row.scores.aggregate - mean);
            ++n;
        }
    }
    return n > 1 ? std::sqrt(ss / (n - 1)) : 0.0;
}

std::string sweep_csv(const SweepResult& result) {
    std::ostringstream out;
    out << "pruner,sparsity,variant,topk,alpha,seed,fq,utility,aggregate,forget_em,retain_em,"
           "epochs,wall_ms\n";
    for (const auto& c : result.cells) {
        const auto& k = c.row.key;
        const auto& s = c.row.scores;
        out << k.pruner << ',' << num(k.sparsity) << ',' << variant_name(k.variant) << ','
            << num(k.topk) << ',' << num(k.alpha) << ',' << k.seed << ','
            << num(s.forget_quality) << ',' << num(s.utility) << ',' << num(s.aggregate) << ','
            << num(s.forget_em) << ',' << num(s.retain_em) << ',' << c.row.epochs << ','
            << c.row.wall_ms << '\n';
    }
    return out.str();
}

std::string sweep_svg(const SweepResult& result) {
    if (result.cells.empty()) {
        throw ContractError("sweep_svg: empty table");
    }
    // Mean aggregate per (variant label, sparsity), variants in first-seen
    // order, sparsities ascending.
    std::vector<std::string> variants;
    std::map<std::pair<std::string, double>, std::pair<double, int>> acc;
    std::vector<double> sparsities;
    for (const auto& c : result.cells) {
        const std::string v = variant_name(c.row.key.variant);
        if (std::find(variants.begin(), variants.end(), v) == variants.end()) {
            variants.push_back(v);
        }
        if (std::find(sparsities.begin(), sparsities.end(), c.row.key.sparsity) ==
            sparsities.end()) {
            sparsities.push_back(c.row.key.sparsity);
        }
        auto& slot = acc[{v, c.row.key.sparsity}];
        slot.first += c.row.scores.aggregate;
        slot.second += 1;
    }
    std::sort(sparsities.begin(), sparsities.end());

    const double width = 800.0, height = 500.0;
    const double ml = 70.0, mr = 160.0, mt = 40.0, mb = 60.0;
    const double x0 = ml, x1 = width - mr, y0 = height - mb, y1 = mt;
    const double smin = sparsities.front();
    const double smax = sparsities.back() > smin ? sparsities.back() : smin + 1.0;
    auto sx = [&](double s) { return x0 + (s - smin) / (smax - smin) * (x1 - x0); };
    auto sy = [&](double a) { return y0 - a * (y0 - y1); };

    const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"500\" "
           "viewBox=\"0 0 800 500\">\n";
    svg << "<rect width=\"800\" height=\"500\" fill=\"white\"/>\n";
    svg << "<text x=\"" << fixed((x0 + x1) / 2, 1)
        << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">"
           "Aggregate score vs sparsity</text>\n";
    // Axes.
    svg << "<line x1=\"" << fixed(x0, 1) << "\" y1=\"" << fixed(y0, 1) << "\" x2=\""
        << fixed(x1, 1) << "\" y2=\"" << fixed(y0, 1) << "\" stroke=\"black\"/>\n";
    svg << "<line x1=\"" << fixed(x0, 1) << "\" y1=\"" << fixed(y0, 1) << "\" x2=\""
        << fixed(x0, 1) << "\" y2=\"" << fixed(y1, 1) << "\" stroke=\"black\"/>\n";
    for (double s : sparsities) {
        svg << "<line x1=\"" << fixed(sx(s), 1) << "\" y1=\"" << fixed(y0, 1) << "\" x2=\""
            << fixed(sx(s), 1) << "\" y2=\"" << fixed(y0 + 5, 1) << "\" stroke=\"black\"/>\n";
        svg << "<text x=\"" << fixed(sx(s), 1) << "\" y=\"" << fixed(y0 + 20, 1)
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">"
            << fixed(s, 2) << "</text>\n";
    }
    for (int i = 0; i <= 5; ++i) {
        const double a = i / 5.0;
        svg << "<line x1=\"" << fixed(x0 - 5, 1) << "\" y1=\"" << fixed(sy(a), 1) << "\" x2=\""
            << fixed(x0, 1) << "\" y2=\"" << fixed(sy(a), 1) << "\" stroke=\"black\"/>\n";
        svg << "<text x=\"" << fixed(x0 - 10, 1) << "\" y=\"" << fixed(sy(a) + 4, 1)
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\">"
            << fixed(a, 1) << "</text>\n";
    }
    svg << "<text x=\"" << fixed((x0 + x1) / 2, 1) << "\" y=\"" << fixed(height - 15, 1)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">"
           "sparsity</text>\n";
    svg << "<text x=\"20\" y=\"" << fixed((y0 + y1) / 2, 1)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
           "transform=\"rotate(-90 20 "
        << fixed((y0 + y1) / 2, 1) << ")\">aggregate</text>\n";
    // Polylines + markers per variant.
    for (std::size_t vi = 0; vi < variants.size(); ++vi) {
        const char* color = colors[vi % 6];
        std::ostringstream points;
        std::vector<std::pair<double, double>> pts;
        for (double s : sparsities) {
            auto it = acc.find({variants[vi], s});
            if (it == acc.end()) {
                continue;
            }
            const double a = it->second.first / it->second.second;
            pts.emplace_back(sx(s), sy(a));
            points << fixed(sx(s), 1) << ',' << fixed(sy(a), 1) << ' ';
        }
        svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\""
            << points.str() << "\"/>\n";
        for (const auto& [px, py] : pts) {
            svg << "<circle cx=\"" << fixed(px, 1) << "\" cy=\"" << fixed(py, 1)
                << "\" r=\"3\" fill=\"" << color << "\"/>\n";
        }
        // Legend.
        const double ly = mt + 20.0 * static_cast<double>(vi);
        svg << "<line x1=\"" << fixed(x1 + 15, 1) << "\" y1=\"" << fixed(ly, 1) << "\" x2=\""
            << fixed(x1 + 40, 1) << "\" y2=\"" << fixed(ly, 1) << "\" stroke=\"" << color
            << "\" stroke-width=\"2\"/>\n";
        svg << "<text x=\"" << fixed(x1 + 46, 1) << "\" y=\"" << fixed(ly + 4, 1)
            << "\" font-family=\"sans-serif\" font-size=\"12\">" << variants[vi] << "</text>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

std::string sweep_summary_json(const SweepSpec& spec, const SweepResult& result) {
    ordered_json j;
    j["spec"] = {{"pruner", spec.pruner},
                 {"sparsities", spec.sparsities},
                 {"seeds", spec.seeds},
                 {"topk_ratio", spec.sau.topk_ratio},
                 {"alpha", spec.sau.alpha},
                 {"eta", spec.unlearn.eta},
                 {"lambda", spec.unlearn.lambda},
                 {"epochs", spec.unlearn.epochs}};
    // The desk-scale aggregate substitutes the benchmark composites of the
    // reference experiments; scores are comparable within this artifact only.
    j["metric_note"] =
        "aggregate = harmonic mean of (1 - forget exact-match) and retain exact-match";
    j["aggregates"] = ordered_json::array();
    std::vector<std::pair<double, std::string>> groups;
    for (const auto& c : result.cells) {
        const auto g = std::make_pair(c.row.key.sparsity, variant_name(c.row.key.variant));
        if (std::find(groups.begin(), groups.end(), g) == groups.end()) {
            groups.push_back(g);
        }
    }
    std::sort(groups.begin(), groups.end());
    for (const auto& [s, v] : groups) {
        j["aggregates"].push_back(
            {{"sparsity", s},
             {"variant", v},
             {"mean", result.mean_aggregate(s, variant_from_name(v))},
             {"stdev", result.stdev_aggregate(s, variant_from_name(v))}});
    }
    j["cells"] = ordered_json::array();
    for (const auto& c : result.cells) {
        j["cells"].push_back({{"tag", c.row.key.tag()},
                              {"aggregate", c.row.scores.aggregate},
                              {"forget_em", c.row.scores.forget_em},
                              {"retain_em", c.row.scores.retain_em},
                              {"manifest", ordered_json::parse(c.manifest.to_json())}});
    }
    j["failures"] = result.failures;
    return j.dump(2) + "\n";
}

std::string ResurfacingReport::to_json() const {
    ordered_json j;
    j["pruner"] = pruner;
    j["sparsity"] = sparsity;
    j["unlearned_arm"] = {{"forget_em_before_prune", unlearned_forget_em_before},
                          {"forget_em_after_prune", unlearned_forget_em_after},
                          {"retain_em_before_prune", unlearned_retain_em_before},
                          {"retain_em_after_prune", unlearned_retain_em_after},
                          {"delta_forget_em", delta_forget_em},
                          {"delta_retain_em", delta_retain_em}};
    j["control_arm"] = {{"forget_em_before_prune", control_forget_em_before},
                        {"forget_em_after_prune", control_forget_em_after},
                        {"retain_em_before_prune", control_retain_em_before},
                        {"retain_em_after_prune", control_retain_em_after}};
    return j.dump(2) + "\n";
}

}  // namespace sau
