#include "hiconn/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>

namespace hiconn {

using nlohmann::json;

void SyntheticSpec::validate() const {
    if (n_subjects < 1) throw ValidationError("synthetic: n_subjects must be positive");
    if (atlas_size < 2) throw ValidationError("synthetic: atlas_size must be at least 2");
    if (modules < 1 || modules > atlas_size) throw ValidationError("synthetic: modules must lie in [1, atlas_size]");
    if (!(p_in >= 0.0 && p_in <= 1.0 && p_out >= 0.0 && p_out <= 1.0)) {
        throw ValidationError("synthetic: edge probabilities must lie in [0, 1]");
    }
    if (!(p_in > p_out)) throw ValidationError("synthetic: p_in must exceed p_out");
    if (!(sigma >= 0.0 && mc_noise >= 0.0 && delta >= 0.0)) {
        throw ValidationError("synthetic: sigma, mc_noise and delta must be nonnegative");
    }
    if (!(mu_in > 0.0 && mu_out > 0.0)) throw ValidationError("synthetic: mean weights must be positive");
    if (!(prevalence >= 0.0 && prevalence <= 1.0)) throw ValidationError("synthetic: prevalence must lie in [0, 1]");
    if (!(reassign >= 0.0 && reassign <= 1.0)) throw ValidationError("synthetic: reassign must lie in [0, 1]");
    if (effect_modules > modules) throw ValidationError("synthetic: effect_modules exceeds modules");
}

SyntheticSpec synthetic_spec_from_json(const json& j) {
    SyntheticSpec s;
    try {
        s.n_subjects = j.value("n_subjects", s.n_subjects);
        s.atlas_size = j.value("atlas_size", s.atlas_size);
        s.modules = j.value("modules", s.modules);
        s.p_in = j.value("p_in", s.p_in);
        s.p_out = j.value("p_out", s.p_out);
        s.mu_in = j.value("mu_in", s.mu_in);
        s.mu_out = j.value("mu_out", s.mu_out);
        s.sigma = j.value("sigma", s.sigma);
        s.mc_noise = j.value("mc_noise", s.mc_noise);
        s.delta = j.value("delta", s.delta);
        s.prevalence = j.value("prevalence", s.prevalence);
        s.reassign = j.value("reassign", s.reassign);
        s.effect_modules = j.value("effect_modules", s.effect_modules);
    } catch (const json::exception& e) {
        throw ValidationError(std::string("synthetic spec: ") + e.what());
    }
    s.validate();
    return s;
}

json to_json(const SyntheticSpec& s) {
    return {{"n_subjects", s.n_subjects}, {"atlas_size", s.atlas_size}, {"modules", s.modules},
            {"p_in", s.p_in},             {"p_out", s.p_out},           {"mu_in", s.mu_in},
            {"mu_out", s.mu_out},         {"sigma", s.sigma},           {"mc_noise", s.mc_noise},
            {"delta", s.delta},           {"prevalence", s.prevalence}, {"reassign", s.reassign},
            {"effect_modules", s.effect_modules}};
}

SyntheticSpec read_synthetic_spec(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open synthetic spec " + path.string());
    try {
        return synthetic_spec_from_json(json::parse(in));
    } catch (const json::parse_error& e) {
        throw ValidationError("malformed synthetic spec " + path.string() + ": " + e.what());
    }
}

namespace {

// splitmix64 finalizer; decorrelates per-subject streams.
std::uint64_t mix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

struct SubjectDraw {
    Matrix sc;
    Matrix mc;
    std::vector<std::size_t> planted;
};

SubjectDraw draw_subject(const SyntheticSpec& spec, bool affected, std::mt19937_64& rng) {
    const std::size_t n = spec.atlas_size;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_int_distribution<std::size_t> any_module(0, spec.modules - 1);

    SubjectDraw d;
    d.planted.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        d.planted[i] = i * spec.modules / n;
        if (unit(rng) < spec.reassign) d.planted[i] = any_module(rng);
    }
    auto boosted = [&](std::size_t i, std::size_t j) {
        return affected && d.planted[i] == d.planted[j] && d.planted[i] < spec.effect_modules;
    };
    const double boost = 1.0 + spec.delta;

    d.sc = Matrix(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            bool same = d.planted[i] == d.planted[j];
            double u = unit(rng);
            double z = normal(rng);
            if (u >= (same ? spec.p_in : spec.p_out)) continue;
            double w = std::fabs((same ? spec.mu_in : spec.mu_out) + spec.sigma * z);
            if (boosted(i, j)) w *= boost;
            d.sc(i, j) = w;
            d.sc(j, i) = w;
        }
    }

    double peak = *std::max_element(d.sc.data.begin(), d.sc.data.end());
    d.mc = Matrix(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            double base = peak > 0.0 ? d.sc(i, j) / peak : 0.0;
            double u = unit(rng);
            double z = normal(rng);
            if (base == 0.0 && u >= spec.p_out) continue;
            double noise = spec.mc_noise * z;
            if (boosted(i, j)) noise /= boost;
            double w = std::fabs(base + noise);
            d.mc(i, j) = w;
            d.mc(j, i) = w;
        }
    }
    return d;
}

}  // namespace

SyntheticCohort generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed) {
    spec.validate();
    const std::size_t positives =
        static_cast<std::size_t>(std::llround(static_cast<double>(spec.n_subjects) * spec.prevalence));
    std::vector<int> labels(spec.n_subjects, 0);
    std::fill_n(labels.begin(), positives, 1);
    std::mt19937_64 label_rng(mix(seed));
    std::shuffle(labels.begin(), labels.end(), label_rng);

    SyntheticCohort cohort;
    cohort.dataset.atlas_size = spec.atlas_size;
    for (std::size_t s = 0; s < spec.n_subjects; ++s) {
        std::mt19937_64 rng(mix(seed ^ mix(s + 1)));
        SubjectDraw d = draw_subject(spec, labels[s] == 1, rng);
        char id[32];
        std::snprintf(id, sizeof(id), "sub-%04zu", s);
        cohort.dataset.subjects.push_back(make_subject(id, d.sc, d.mc, labels[s]));
        cohort.planted.push_back(std::move(d.planted));
    }
    return cohort;
}

SyntheticCohort generate_synthetic_to(const std::filesystem::path& dir, const SyntheticSpec& spec, std::uint64_t seed) {
    SyntheticCohort cohort = generate_synthetic(spec, seed);
    write_dataset(dir, cohort.dataset);
    return cohort;
}

}  // namespace hiconn
