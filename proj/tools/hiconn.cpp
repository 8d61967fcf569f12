// hiconn: generate synthetic cohorts, train/evaluate the hierarchical model,
// run the gradient check and the ablation table.
//
// Exit codes: 0 success, 1 validation or usage error, 2 I/O error.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hiconn/ablation.hpp"
#include "hiconn/config.hpp"
#include "hiconn/connectome.hpp"
#include "hiconn/gradcheck.hpp"
#include "hiconn/synthetic.hpp"
#include "hiconn/train.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using namespace hiconn;

namespace {

constexpr int kOk = 0;
constexpr int kValidation = 1;
constexpr int kIo = 2;

std::uint64_t env_seed(std::uint64_t fallback) {
    const char* s = std::getenv("HICONN_SEED");
    if (s == nullptr || *s == '\0') return fallback;
    try {
        return std::stoull(s);
    } catch (const std::exception&) {
        throw ValidationError(std::string("HICONN_SEED is not an integer: ") + s);
    }
}

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag, std::uint64_t fallback) {
    return flag ? *flag : env_seed(fallback);
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << text;
}

nlohmann::json read_json_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError("malformed JSON in " + path.string() + ": " + e.what());
    }
}

std::vector<std::string> partition_ids(const DatasetSplit& split, const std::string& which) {
    if (which == "train") return split.train;
    if (which == "val") return split.val;
    if (which == "test") return split.test;
    if (which == "all") {
        std::vector<std::string> ids = split.train;
        ids.insert(ids.end(), split.val.begin(), split.val.end());
        ids.insert(ids.end(), split.test.begin(), split.test.end());
        return ids;
    }
    throw ValidationError("unknown partition " + which);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hierarchical multimodal connectome classifier"};
    app.require_subcommand(1);

    // gen
    auto* gen = app.add_subcommand("gen", "Write a synthetic paired SC/MC cohort");
    SyntheticSpec spec;
    std::string spec_file, gen_out;
    std::optional<std::uint64_t> gen_seed;
    gen->add_option("--spec", spec_file, "JSON synthetic spec (flags override its fields)");
    gen->add_option("--subjects", spec.n_subjects, "Number of subjects");
    gen->add_option("--nodes", spec.atlas_size, "Atlas size N");
    gen->add_option("--modules", spec.modules, "Planted module count");
    gen->add_option("--p-in", spec.p_in, "Intra-module edge probability");
    gen->add_option("--p-out", spec.p_out, "Inter-module edge probability");
    gen->add_option("--sigma", spec.sigma, "SC weight noise");
    gen->add_option("--mc-noise", spec.mc_noise, "MC noise scale");
    gen->add_option("--delta", spec.delta, "Class effect strength");
    gen->add_option("--prevalence", spec.prevalence, "Fraction of label-1 subjects");
    gen->add_option("--reassign", spec.reassign, "Per-node module reassignment probability");
    gen->add_option("--seed", gen_seed, "Random seed");
    gen->add_option("--out", gen_out, "Output directory")->required();

    // train
    auto* tr = app.add_subcommand("train", "Train on a dataset and write a run record");
    std::string tr_data, tr_config, tr_out, tr_split, tr_variant = "full";
    std::optional<std::uint64_t> tr_seed;
    std::optional<std::size_t> tr_epochs;
    tr->add_option("--data", tr_data, "Dataset directory or manifest")->required();
    tr->add_option("--config", tr_config, "TrainConfig JSON");
    tr->add_option("--out", tr_out, "Output directory")->required();
    tr->add_option("--split", tr_split, "Split JSON (default: stratified split by seed)");
    tr->add_option("--variant", tr_variant, "full | no-MIM | no-PMP | no-MFF");
    tr->add_option("--epochs", tr_epochs, "Override the configured epoch count");
    tr->add_option("--seed", tr_seed, "Random seed");

    // eval
    auto* ev = app.add_subcommand("eval", "Evaluate a saved model");
    std::string ev_model, ev_data, ev_split, ev_part = "test";
    ev->add_option("--model", ev_model, "model.json from train")->required();
    ev->add_option("--data", ev_data, "Dataset directory or manifest")->required();
    ev->add_option("--split", ev_split, "Split JSON")->required();
    ev->add_option("--partition", ev_part, "train | val | test | all");

    // gradcheck
    auto* gc = app.add_subcommand("gradcheck", "Finite-difference check of every parameter gradient");
    std::optional<std::uint64_t> gc_seed;
    gc->add_option("--seed", gc_seed, "Parameter seed");

    // ablate
    auto* ab = app.add_subcommand("ablate", "Train all ablation variants over several seeds");
    std::string ab_data, ab_config, ab_out;
    std::size_t ab_seeds = 5;
    std::optional<std::uint64_t> ab_seed;
    ab->add_option("--data", ab_data, "Dataset directory or manifest")->required();
    ab->add_option("--seeds", ab_seeds, "Number of seeds");
    ab->add_option("--seed", ab_seed, "First seed");
    ab->add_option("--config", ab_config, "TrainConfig JSON");
    ab->add_option("--out", ab_out, "Write the TSV table here as well");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n\n" << app.help();
        return kValidation;
    }

    try {
        if (*gen) {
            SyntheticSpec s = spec;
            if (!spec_file.empty()) {
                // Spec file supplies the base; explicitly passed flags win.
                s = read_synthetic_spec(spec_file);
                for (const auto* opt : gen->get_options()) {
                    if (opt->count() == 0) continue;
                    const std::string name = opt->get_name();
                    if (name == "--subjects") s.n_subjects = spec.n_subjects;
                    if (name == "--nodes") s.atlas_size = spec.atlas_size;
                    if (name == "--modules") s.modules = spec.modules;
                    if (name == "--p-in") s.p_in = spec.p_in;
                    if (name == "--p-out") s.p_out = spec.p_out;
                    if (name == "--sigma") s.sigma = spec.sigma;
                    if (name == "--mc-noise") s.mc_noise = spec.mc_noise;
                    if (name == "--delta") s.delta = spec.delta;
                    if (name == "--prevalence") s.prevalence = spec.prevalence;
                    if (name == "--reassign") s.reassign = spec.reassign;
                }
            }
            SyntheticCohort cohort = generate_synthetic_to(gen_out, s, resolve_seed(gen_seed, 0));
            auto counts = cohort.dataset.class_counts();
            std::cout << "wrote " << cohort.dataset.subjects.size() << " subjects (" << counts[0] << " label-1, "
                      << counts[1] << " label-0) to " << gen_out << "\n";
            return kOk;
        }

        if (*tr) {
            TrainConfig cfg = tr_config.empty() ? TrainConfig{} : read_config(tr_config);
            cfg.seed = resolve_seed(tr_seed, cfg.seed);
            if (tr_epochs) cfg.epochs = *tr_epochs;
            Dataset ds = load_dataset_dir(tr_data);
            DatasetSplit split = tr_split.empty() ? stratified_split(ds.subjects, cfg.seed) : read_split(tr_split);
            TrainResult result = train(ds, split, cfg, variant_from_name(tr_variant));

            std::error_code ec;
            fs::create_directories(tr_out, ec);
            if (ec) throw IoError("cannot create " + tr_out + ": " + ec.message());
            const fs::path out(tr_out);
            write_file(out / "run_record.json", serialize(result.record));
            write_file(out / "model.json", model_to_json(result.model).dump() + "\n");
            write_split(out / "split.json", split);
            write_file(out / "timing.json",
                       nlohmann::json{{"wall_clock_seconds", result.record.wall_clock_seconds}}.dump() + "\n");
            std::cout << "best epoch " << result.record.best_epoch << "  test " << format_metrics(result.record.test)
                      << "\nrun record digest " << digest(result.record) << "\n";
            return kOk;
        }

        if (*ev) {
            Model model = model_from_json(read_json_file(ev_model));
            Dataset ds = load_dataset_dir(ev_data);
            DatasetSplit split = read_split(ev_split);
            std::vector<const Subject*> subjects = select(ds, partition_ids(split, ev_part));
            if (subjects.empty()) throw ValidationError("partition " + ev_part + " is empty");
            Metrics m = evaluate(model, subjects);
            const Confusion& c = m.confusion;
            std::cout << ev_part << " " << format_metrics(m) << "  TP=" << c.tp << " FP=" << c.fp << " FN=" << c.fn
                      << " TN=" << c.tn << "\n";
            return kOk;
        }

        if (*gc) {
            TrainConfig cfg = toy_config(resolve_seed(gc_seed, 1));
            Subject toy = toy_subject();
            Model model = Model::initialize(toy.nodes(), cfg, Variant::full, cfg.seed);
            GradCheckReport r = gradient_check(toy, model);
            for (const GradCheckEntry& e : r.per_parameter) {
                std::cout << "  " << e.parameter << "  max rel error " << e.rel_error << "\n";
            }
            std::cout << "checked " << r.checked << " gradients, max relative error " << r.max_rel_error << " ("
                      << r.worst.parameter << "[" << r.worst.index << "])"
                      << (r.structure_stable ? "" : "  [warning: a probe changed the discrete structure]") << "\n";
            return r.max_rel_error < 1e-4 ? kOk : kValidation;
        }

        if (*ab) {
            TrainConfig cfg = ab_config.empty() ? TrainConfig{} : read_config(ab_config);
            std::uint64_t first = resolve_seed(ab_seed, cfg.seed);
            std::vector<std::uint64_t> seeds;
            for (std::size_t i = 0; i < ab_seeds; ++i) seeds.push_back(first + i);
            Dataset ds = load_dataset_dir(ab_data);
            std::string table = ablation_tsv(ablate(ds, cfg, seeds));
            std::cout << table;
            if (!ab_out.empty()) write_file(ab_out, table);
            return kOk;
        }
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kIo;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kValidation;
    }
    return kValidation;
}
