#include <algorithm>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"

#include "modnet/csv.hpp"
#include "modnet/evaluation.hpp"
#include "modnet/generator.hpp"
#include "modnet/merge_init.hpp"
#include "modnet/model_io.hpp"
#include "modnet/report.hpp"
#include "modnet/search.hpp"

namespace {

using namespace modnet;

struct CommonFlags {
    PriorSpec prior;
    SearchConfig cfg;
    bool no_standardize = false;

    void attach_prior(CLI::App* cmd) {
        cmd->add_option("--mu0", prior.mu0, "Normal-Gamma prior mean");
        cmd->add_option("--kappa0", prior.kappa0, "Normal-Gamma prior pseudo-count")
            ->check(CLI::PositiveNumber);
        cmd->add_option("--alpha0", prior.alpha0, "Normal-Gamma prior shape")
            ->check(CLI::PositiveNumber);
        cmd->add_option("--beta0", prior.beta0, "Normal-Gamma prior rate")
            ->check(CLI::PositiveNumber);
        cmd->add_option("--lambda-s", prior.lambda_s, "per-interior-node structure penalty")
            ->check(CLI::NonNegativeNumber);
    }

    void attach_search(CLI::App* cmd, bool with_K = true) {
        if (with_K) cmd->add_option("--K", cfg.K, "module count")->check(CLI::PositiveNumber);
        cmd->add_option("--max-iters", cfg.max_outer_iters, "outer iteration cap")
            ->check(CLI::PositiveNumber);
        cmd->add_option("--epsilon", cfg.epsilon, "convergence threshold")
            ->check(CLI::NonNegativeNumber);
        cmd->add_option("--lookahead", cfg.lookahead, "split lookahead depth")
            ->check(CLI::PositiveNumber);
        cmd->add_option("--beam", cfg.beam_width, "beam width")->check(CLI::PositiveNumber);
        cmd->add_option("--min-leaf", cfg.min_leaf, "minimum pooled observations per leaf")
            ->check(CLI::PositiveNumber);
        cmd->add_option("--seed", cfg.rng_seed, "random seed");
        cmd->add_flag("--no-standardize", no_standardize,
                      "skip per-column standardization of input data");
    }
};

std::string kv(const std::string& key, const std::string& value) { return key + "=" + value + "\n"; }

Dataset prepare(const std::string& path, bool standardize_on,
                std::optional<Standardization>& transform) {
    Dataset raw = load_csv(path);
    if (!standardize_on) return raw;
    StandardizeResult r = standardize(raw);
    for (const std::string& w : r.warnings) std::cerr << "warning: " << w << "\n";
    transform = std::move(r.transform);
    return std::move(r.data);
}

int run_learn(const std::string& data_path, const std::string& model_out,
              const std::string& trace_out, CommonFlags& flags) {
    std::optional<Standardization> transform;
    const Dataset data = prepare(data_path, !flags.no_standardize, transform);
    ModuleNetwork init = ModuleNetwork::with_single_leaves(
        initialize(data, flags.prior, flags.cfg.K, flags.cfg.rng_seed));
    init.var_names = data.var_names();
    LearnResult res = learn(data, flags.prior, flags.cfg, init);
    res.net.standardization = transform;
    save_model(res.net, model_out);
    if (!trace_out.empty()) write_text_atomic(trace_out, trace_csv(res.trace));

    std::string summary;
    summary += kv("instances", std::to_string(data.instance_count()));
    summary += kv("variables", std::to_string(data.variable_count()));
    summary += kv("modules", std::to_string(flags.cfg.K));
    summary += kv("commits", std::to_string(res.trace.size()));
    summary += kv("final_score", format_double(res.final_score));
    std::cout << summary;
    return 0;
}

int run_sample(const std::string& model_path, int count, std::uint64_t seed,
               const std::string& out) {
    const ModuleNetwork net = load_model(model_path);
    write_csv(sample(net, count, seed), out);
    return 0;
}

int run_eval(const std::string& model_path, const std::string& data_path) {
    const ModuleNetwork net = load_model(model_path);
    const Dataset data = load_csv(data_path);
    std::cout << kv("heldout_ll_per_instance", format_double(heldout_ll(net, data)));
    return 0;
}

int run_xval(const std::string& data_path, std::vector<int> Ks, int folds,
             const std::string& out, CommonFlags& flags) {
    std::optional<Standardization> transform;
    const Dataset data = prepare(data_path, !flags.no_standardize, transform);
    if (Ks.empty()) Ks.push_back(flags.cfg.K);

    std::string text;
    std::string csv = "K,fold,train_count,test_count,heldout,baseline,delta\n";
    for (int K : Ks) {
        SearchConfig cfg = flags.cfg;
        cfg.K = K;
        const EvalReport rep = cross_validate(data, flags.prior, cfg, folds);
        text += kv("K", std::to_string(K));
        text += kv("folds", std::to_string(folds));
        text += kv("heldout_mean", format_double(rep.heldout_mean));
        text += kv("heldout_stddev", format_double(rep.heldout_stddev));
        text += kv("baseline_mean", format_double(rep.baseline_mean));
        text += kv("baseline_stddev", format_double(rep.baseline_stddev));
        text += kv("failures", std::to_string(rep.failures));
        text += "\n";
        for (const FoldRecord& r : rep.folds) {
            csv += std::to_string(K) + "," + std::to_string(r.fold) + "," +
                   std::to_string(r.train_count) + "," + std::to_string(r.test_count) + "," +
                   format_double(r.heldout) + "," + format_double(r.baseline_heldout) + "," +
                   format_double(r.heldout - r.baseline_heldout) + "\n";
        }
    }
    std::cout << text;
    if (out.empty()) {
        std::cout << csv;
    } else {
        write_text_atomic(out, csv);
    }
    return 0;
}

int run_gen(const GeneratorSpec& spec, int count, const std::string& model_out,
            const std::string& data_out) {
    const ModuleNetwork net = generate_truth(spec);
    save_model(net, model_out);
    if (!data_out.empty()) {
        // dataset stream decoupled from the structure stream
        write_csv(sample(net, count, spec.seed + 1), data_out);
    }
    return 0;
}

int run_recover(const std::string& learned_path, const std::string& truth_path, int top) {
    const ModuleNetwork learned = load_model(learned_path);
    const ModuleNetwork truth = load_model(truth_path);
    std::cout << kv("recovered_edge_fraction",
                    format_double(recovered_edge_fraction(learned, truth)));
    std::cout << kv("top_module_mass", format_double(top_module_mass(learned, top)));
    return 0;
}

// Two comma-separated columns per line, no header.
std::vector<std::pair<std::string, std::string>> load_pairs(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::vector<std::pair<std::string, std::string>> pairs;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos || comma == 0 || comma + 1 == line.size())
            throw std::runtime_error(path + ": line " + std::to_string(lineno) +
                                     ": expected 'name,label'");
        pairs.emplace_back(line.substr(0, comma), line.substr(comma + 1));
    }
    return pairs;
}

int run_enrich(const std::string& members_path, const std::string& labels_path,
               const std::string& out) {
    const auto membership = load_pairs(members_path);
    std::map<std::string, std::string> module_of;
    std::map<std::string, long long> module_size;
    for (const auto& [item, module] : membership) {
        if (!module_of.emplace(item, module).second)
            throw std::runtime_error("duplicate membership for item '" + item + "'");
        module_size[module]++;
    }
    const long long population = static_cast<long long>(module_of.size());

    std::set<std::pair<std::string, std::string>> labeled;  // (item, label), deduped
    long long unknown = 0;
    for (const auto& [item, label] : load_pairs(labels_path)) {
        if (!module_of.count(item)) {
            ++unknown;
            continue;
        }
        labeled.insert({item, label});
    }
    if (unknown > 0)
        std::cerr << "warning: " << unknown << " annotation line(s) name unknown items\n";

    std::map<std::string, long long> annotated;                        // label -> count
    std::map<std::pair<std::string, std::string>, long long> hits;     // (module, label)
    for (const auto& [item, label] : labeled) {
        annotated[label]++;
        hits[{module_of.at(item), label}]++;
    }

    std::string csv = "module,label,module_size,annotated,hits,pvalue\n";
    for (const auto& [module, size] : module_size) {
        for (const auto& [label, ann] : annotated) {
            long long h = 0;
            if (auto it = hits.find({module, label}); it != hits.end()) h = it->second;
            csv += module + "," + label + "," + std::to_string(size) + "," + std::to_string(ann) +
                   "," + std::to_string(h) + "," +
                   format_double(enrichment_pvalue(population, ann, size, h)) + "\n";
        }
    }
    if (out.empty()) {
        std::cout << csv;
    } else {
        write_text_atomic(out, csv);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"module network learner"};
    app.require_subcommand(1);

    CommonFlags flags;

    auto* learn_cmd = app.add_subcommand("learn", "learn a module network from CSV data");
    std::string learn_data, learn_model = "model.json", learn_trace;
    learn_cmd->add_option("--data", learn_data, "training CSV")->required();
    learn_cmd->add_option("--out", learn_model, "model output path");
    learn_cmd->add_option("--trace", learn_trace, "committed-operator trace CSV output");
    flags.attach_search(learn_cmd);
    flags.attach_prior(learn_cmd);

    auto* sample_cmd = app.add_subcommand("sample", "draw instances from a model");
    std::string sample_model, sample_out = "sample.csv";
    int sample_count = 100;
    std::uint64_t sample_seed = 0;
    sample_cmd->add_option("--model", sample_model, "model path")->required();
    sample_cmd->add_option("--count", sample_count, "instances to draw")
        ->check(CLI::PositiveNumber);
    sample_cmd->add_option("--seed", sample_seed, "random seed");
    sample_cmd->add_option("--out", sample_out, "CSV output path");

    auto* eval_cmd = app.add_subcommand("eval", "held-out log-likelihood of data under a model");
    std::string eval_model, eval_data;
    eval_cmd->add_option("--model", eval_model, "model path")->required();
    eval_cmd->add_option("--data", eval_data, "evaluation CSV")->required();

    auto* xval_cmd = app.add_subcommand("xval", "k-fold cross-validation with the K=n baseline");
    std::string xval_data, xval_out;
    std::vector<int> xval_Ks;
    int xval_folds = 10;
    xval_cmd->add_option("--data", xval_data, "CSV data")->required();
    xval_cmd->add_option("--K", xval_Ks, "module counts to evaluate")
        ->check(CLI::PositiveNumber);
    xval_cmd->add_option("--folds", xval_folds, "fold count")->check(CLI::Range(2, 1 << 20));
    xval_cmd->add_option("--out", xval_out, "report output path (default stdout)");
    CommonFlags xval_flags;
    xval_flags.attach_search(xval_cmd, /*with_K=*/false);
    xval_flags.attach_prior(xval_cmd);

    auto* gen_cmd = app.add_subcommand("gen", "generate a ground-truth model and sampled data");
    GeneratorSpec spec;
    int gen_count = 500;
    std::string gen_model = "truth.json", gen_data;
    gen_cmd->add_option("--n", spec.n, "variable count")->check(CLI::PositiveNumber);
    gen_cmd->add_option("--K-true", spec.K_true, "true module count")
        ->check(CLI::PositiveNumber);
    gen_cmd->add_option("--parents-min", spec.parents_min)->check(CLI::NonNegativeNumber);
    gen_cmd->add_option("--parents-max", spec.parents_max)->check(CLI::NonNegativeNumber);
    gen_cmd->add_option("--depth-min", spec.depth_min)->check(CLI::PositiveNumber);
    gen_cmd->add_option("--depth-max", spec.depth_max)->check(CLI::PositiveNumber);
    gen_cmd->add_option("--mean-lo", spec.mean_lo);
    gen_cmd->add_option("--mean-hi", spec.mean_hi);
    gen_cmd->add_option("--var-lo", spec.var_lo)->check(CLI::PositiveNumber);
    gen_cmd->add_option("--var-hi", spec.var_hi)->check(CLI::PositiveNumber);
    gen_cmd->add_option("--noise", spec.noise_scale)->check(CLI::PositiveNumber);
    gen_cmd->add_option("--seed", spec.seed, "random seed");
    gen_cmd->add_option("--count", gen_count, "instances to sample")->check(CLI::PositiveNumber);
    gen_cmd->add_option("--model-out", gen_model, "truth model output path");
    gen_cmd->add_option("--data-out", gen_data, "sampled CSV output path");

    auto* recover_cmd = app.add_subcommand("recover", "structure recovery metrics");
    std::string rec_learned, rec_truth;
    int rec_top = 10;
    recover_cmd->add_option("--learned", rec_learned, "learned model path")->required();
    recover_cmd->add_option("--truth", rec_truth, "truth model path")->required();
    recover_cmd->add_option("--top", rec_top, "module count for top-module mass")
        ->check(CLI::PositiveNumber);

    auto* enrich_cmd = app.add_subcommand("enrich", "hypergeometric annotation enrichment");
    std::string enrich_members, enrich_labels, enrich_out;
    enrich_cmd->add_option("--members", enrich_members, "item,module membership file")
        ->required();
    enrich_cmd->add_option("--labels", enrich_labels, "item,label annotation file")->required();
    enrich_cmd->add_option("--out", enrich_out, "CSV output path (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    }

    try {
        if (learn_cmd->parsed()) return run_learn(learn_data, learn_model, learn_trace, flags);
        if (sample_cmd->parsed())
            return run_sample(sample_model, sample_count, sample_seed, sample_out);
        if (eval_cmd->parsed()) return run_eval(eval_model, eval_data);
        if (xval_cmd->parsed())
            return run_xval(xval_data, xval_Ks, xval_folds, xval_out, xval_flags);
        if (gen_cmd->parsed()) return run_gen(spec, gen_count, gen_model, gen_data);
        if (recover_cmd->parsed()) return run_recover(rec_learned, rec_truth, rec_top);
        if (enrich_cmd->parsed()) return run_enrich(enrich_members, enrich_labels, enrich_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
