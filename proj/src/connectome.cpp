#include "hiconn/connectome.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "json.hpp"

namespace hiconn {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string cell(std::size_t r, std::size_t c) { return "(" + std::to_string(r) + ", " + std::to_string(c) + ")"; }

json read_json(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ValidationError("malformed JSON in " + path.string() + ": " + e.what());
    }
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << text;
    if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace

std::vector<std::size_t> ConnectomeGraph::neighbors(std::size_t i) const {
    std::vector<std::size_t> out;
    for (std::size_t j = 0; j < adjacency.cols; ++j)
        if (j != i && adjacency(i, j) > 0.0) out.push_back(j);
    return out;
}

ConnectomeGraph validate_graph(const Matrix& raw, Modality modality) {
    if (raw.rows != raw.cols) {
        throw ValidationError("adjacency must be square, got " + shape_string(raw.rows, raw.cols));
    }
    const std::size_t n = raw.rows;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            double v = raw(i, j);
            if (!std::isfinite(v)) throw ValidationError("non-finite weight at " + cell(i, j));
            if (v < 0.0) throw ValidationError("negative weight at " + cell(i, j));
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (std::fabs(raw(i, i)) >= kDiagonalTolerance) {
            throw ValidationError("non-zero self-connection at " + cell(i, i));
        }
        for (std::size_t j = i + 1; j < n; ++j) {
            if (std::fabs(raw(i, j) - raw(j, i)) > kSymmetryTolerance) {
                throw ValidationError("asymmetric weights at " + cell(i, j) + " and " + cell(j, i));
            }
        }
    }

    ConnectomeGraph g;
    g.modality = modality;
    g.raw = raw;
    g.adjacency = Matrix(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            double w = 0.5 * (raw(i, j) + raw(j, i));
            g.adjacency(i, j) = w;
            g.adjacency(j, i) = w;
        }
    }
    return g;
}

void normalize_by_max(ConnectomeGraph& g) {
    double peak = 0.0;
    for (double v : g.adjacency.data) peak = std::max(peak, v);
    if (peak <= 0.0) return;
    for (double& v : g.adjacency.data) v /= peak;
}

ConnectomeGraph init_node_features(ConnectomeGraph g) {
    g.features = g.adjacency;
    return g;
}

Subject make_subject(std::string id, const Matrix& raw_sc, const Matrix& raw_mc, int label) {
    if (label != 0 && label != 1) {
        throw ValidationError("subject " + id + ": unknown label " + std::to_string(label));
    }
    Subject s;
    s.id = std::move(id);
    try {
        s.sc = validate_graph(raw_sc, Modality::structural);
        s.mc = validate_graph(raw_mc, Modality::morphological);
    } catch (const ValidationError& e) {
        throw ValidationError("subject " + s.id + ": " + e.what());
    }
    if (s.sc.nodes() != s.mc.nodes()) {
        throw ValidationError("subject " + s.id + ": SC has " + std::to_string(s.sc.nodes()) + " nodes but MC has " +
                              std::to_string(s.mc.nodes()));
    }
    normalize_by_max(s.sc);
    normalize_by_max(s.mc);
    s.sc = init_node_features(std::move(s.sc));
    s.mc = init_node_features(std::move(s.mc));
    s.label = static_cast<Label>(label);
    return s;
}

std::array<std::size_t, 2> Dataset::class_counts() const {
    std::array<std::size_t, 2> counts{0, 0};
    for (const Subject& s : subjects) ++counts[s.label == Label::mutant ? 0 : 1];
    return counts;
}

const Subject& Dataset::by_id(const std::string& id) const {
    auto it = std::find_if(subjects.begin(), subjects.end(), [&](const Subject& s) { return s.id == id; });
    if (it == subjects.end()) throw ValidationError("unknown subject id " + id);
    return *it;
}

// ---------------------------------------------------------------------------
// Matrix CSV
// ---------------------------------------------------------------------------

Matrix read_matrix_csv(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::vector<double> values;
    std::size_t rows = 0, cols = 0;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::size_t count = 0;
        const char* p = line.data();
        const char* end = line.data() + line.size();
        while (true) {
            while (p < end && *p == ' ') ++p;
            double v = 0.0;
            auto [next, ec] = std::from_chars(p, end, v);
            if (ec != std::errc()) {
                throw ValidationError(path.string() + ": unparsable number on line " + std::to_string(rows + 1));
            }
            values.push_back(v);
            ++count;
            p = next;
            while (p < end && *p == ' ') ++p;
            if (p == end) break;
            if (*p != ',') {
                throw ValidationError(path.string() + ": unexpected character on line " + std::to_string(rows + 1));
            }
            ++p;
        }
        if (rows == 0) cols = count;
        if (count != cols) {
            throw ValidationError(path.string() + ": line " + std::to_string(rows + 1) + " has " +
                                  std::to_string(count) + " values, expected " + std::to_string(cols));
        }
        ++rows;
    }
    return Matrix(rows, cols, std::move(values));
}

void write_matrix_csv(const fs::path& path, const Matrix& m) {
    std::string text;
    text.reserve(m.size() * 20);
    char buf[32];
    for (std::size_t i = 0; i < m.rows; ++i) {
        for (std::size_t j = 0; j < m.cols; ++j) {
            if (j) text.push_back(',');
            // Shortest representation that parses back to the same double.
            auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), m(i, j));
            text.append(buf, end);
        }
        text.push_back('\n');
    }
    write_text(path, text);
}

// ---------------------------------------------------------------------------
// Manifest
// ---------------------------------------------------------------------------

Dataset load_dataset(const fs::path& manifest_path) {
    if (!fs::exists(manifest_path)) throw IoError("manifest not found: " + manifest_path.string());
    json manifest = read_json(manifest_path);
    const fs::path base = manifest_path.parent_path();

    Dataset ds;
    try {
        ds.atlas_size = manifest.at("atlas_size").get<std::size_t>();
        for (const json& entry : manifest.at("subjects")) {
            std::string id = entry.at("id").get<std::string>();
            int label = entry.at("label").get<int>();
            Matrix sc = read_matrix_csv(base / entry.at("sc").get<std::string>());
            Matrix mc = read_matrix_csv(base / entry.at("mc").get<std::string>());
            Subject s = make_subject(id, sc, mc, label);
            if (s.nodes() != ds.atlas_size) {
                throw ValidationError("subject " + id + ": " + std::to_string(s.nodes()) +
                                      " nodes but atlas_size is " + std::to_string(ds.atlas_size));
            }
            ds.subjects.push_back(std::move(s));
        }
    } catch (const json::exception& e) {
        throw ValidationError("malformed manifest " + manifest_path.string() + ": " + e.what());
    }
    return ds;
}

Dataset load_dataset_dir(const fs::path& path) {
    if (fs::is_directory(path)) return load_dataset(path / "manifest.json");
    return load_dataset(path);
}

void write_dataset(const fs::path& dir, const Dataset& dataset) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
    json subjects = json::array();
    for (const Subject& s : dataset.subjects) {
        std::string sc_name = s.id + "_sc.csv";
        std::string mc_name = s.id + "_mc.csv";
        write_matrix_csv(dir / sc_name, s.sc.raw);
        write_matrix_csv(dir / mc_name, s.mc.raw);
        subjects.push_back({{"id", s.id}, {"sc", sc_name}, {"mc", mc_name}, {"label", s.label_index()}});
    }
    json manifest = {{"atlas_size", dataset.atlas_size}, {"subjects", subjects}};
    write_text(dir / "manifest.json", manifest.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// Splits
// ---------------------------------------------------------------------------

std::vector<std::size_t> largest_remainder(std::size_t total, std::span<const double> ratio) {
    std::vector<std::size_t> seats(ratio.size());
    std::vector<double> frac(ratio.size());
    std::size_t given = 0;
    for (std::size_t p = 0; p < ratio.size(); ++p) {
        double quota = static_cast<double>(total) * ratio[p];
        seats[p] = static_cast<std::size_t>(std::floor(quota + 1e-9));
        frac[p] = quota - static_cast<double>(seats[p]);
        given += seats[p];
    }
    std::vector<std::size_t> order(ratio.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return frac[a] > frac[b] + 1e-12; });
    for (std::size_t k = 0; given < total; ++k, ++given) ++seats[order[k % order.size()]];
    return seats;
}

DatasetSplit stratified_split(const std::vector<Subject>& subjects, std::uint64_t seed) {
    if (subjects.size() < 10) {
        throw ValidationError("stratified split needs at least 10 subjects, got " + std::to_string(subjects.size()));
    }
    std::array<std::vector<std::string>, 2> by_class;
    for (const Subject& s : subjects) by_class[static_cast<std::size_t>(s.label_index())].push_back(s.id);
    for (std::size_t c = 0; c < 2; ++c) {
        if (by_class[c].size() < 3) {
            throw ValidationError("class " + std::to_string(c) + " has " + std::to_string(by_class[c].size()) +
                                  " subjects; at least 3 are needed to populate train/val/test");
        }
    }

    constexpr std::size_t kParts = kSplitRatio.size();
    const std::vector<std::size_t> totals = largest_remainder(subjects.size(), kSplitRatio);

    // cells[c][p] starts at the floor of the exact quota.
    std::array<std::array<std::size_t, kParts>, 2> cells{};
    std::array<std::array<double, kParts>, 2> frac{};
    std::array<std::size_t, 2> class_left{};
    std::array<std::size_t, kParts> part_left = {totals[0], totals[1], totals[2]};
    for (std::size_t c = 0; c < 2; ++c) {
        std::size_t given = 0;
        for (std::size_t p = 0; p < kParts; ++p) {
            double quota = static_cast<double>(by_class[c].size()) * kSplitRatio[p];
            cells[c][p] = static_cast<std::size_t>(std::floor(quota + 1e-9));
            frac[c][p] = quota - static_cast<double>(cells[c][p]);
            given += cells[c][p];
            part_left[p] -= cells[c][p];
        }
        class_left[c] = by_class[c].size() - given;
    }

    struct Candidate {
        double frac;
        std::size_t c, p;
    };
    std::vector<Candidate> candidates;
    for (std::size_t c = 0; c < 2; ++c)
        for (std::size_t p = 0; p < kParts; ++p) candidates.push_back({frac[c][p], c, p});
    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const Candidate& a, const Candidate& b) { return a.frac > b.frac + 1e-12; });
    for (const Candidate& cand : candidates) {
        if (class_left[cand.c] > 0 && part_left[cand.p] > 0) {
            ++cells[cand.c][cand.p];
            --class_left[cand.c];
            --part_left[cand.p];
        }
    }
    // Greedy pass can strand a seat when fractions conflict; place it anywhere legal.
    for (std::size_t c = 0; c < 2; ++c) {
        for (std::size_t p = 0; p < kParts && class_left[c] > 0; ++p) {
            while (class_left[c] > 0 && part_left[p] > 0) {
                ++cells[c][p];
                --class_left[c];
                --part_left[p];
            }
        }
    }

    std::mt19937_64 rng(seed);
    DatasetSplit split;
    split.seed = seed;
    std::array<std::vector<std::string>*, kParts> parts{&split.train, &split.val, &split.test};
    for (std::size_t c = 0; c < 2; ++c) {
        std::vector<std::string> ids = by_class[c];
        std::shuffle(ids.begin(), ids.end(), rng);
        std::size_t offset = 0;
        for (std::size_t p = 0; p < kParts; ++p) {
            for (std::size_t k = 0; k < cells[c][p]; ++k) parts[p]->push_back(ids[offset + k]);
            offset += cells[c][p];
        }
    }
    return split;
}

void write_split(const fs::path& path, const DatasetSplit& split) {
    json j = {{"seed", split.seed}, {"train", split.train}, {"val", split.val}, {"test", split.test}};
    write_text(path, j.dump(2) + "\n");
}

DatasetSplit read_split(const fs::path& path) {
    json j = read_json(path);
    try {
        DatasetSplit split;
        split.seed = j.at("seed").get<std::uint64_t>();
        split.train = j.at("train").get<std::vector<std::string>>();
        split.val = j.at("val").get<std::vector<std::string>>();
        split.test = j.at("test").get<std::vector<std::string>>();
        return split;
    } catch (const json::exception& e) {
        throw ValidationError("malformed split file " + path.string() + ": " + e.what());
    }
}

}  // namespace hiconn
