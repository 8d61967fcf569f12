#pragma once

// Paired structural / morphological connectomes: validation, feature
// initialization, on-disk format, and stratified train/val/test splitting.

#include <array>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "hiconn/tensor.hpp"

namespace hiconn {

/// Malformed input data (bad matrix, bad manifest entry, impossible split).
class ValidationError : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

/// Missing or unreadable files.
class IoError : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

enum class Modality { structural, morphological };

struct ConnectomeGraph {
    Modality modality = Modality::structural;
    /// Matrix exactly as read; the on-disk representation.
    Matrix raw;
    /// Symmetric, zero-diagonal, nonnegative working adjacency.
    Matrix adjacency;
    /// Node features X (N x d); empty until init_node_features.
    Matrix features;

    std::size_t nodes() const { return adjacency.rows; }
    /// One-hop neighbours of i (positive weight, excluding i), ascending.
    std::vector<std::size_t> neighbors(std::size_t i) const;
};

inline constexpr double kSymmetryTolerance = 1e-9;
inline constexpr double kDiagonalTolerance = 1e-9;

/// Checks a raw square matrix and builds a graph from it. The diagonal is zeroed
/// when every diagonal entry is within tolerance of zero. Throws ValidationError
/// naming the offending cell otherwise.
ConnectomeGraph validate_graph(const Matrix& raw, Modality modality = Modality::structural);

/// Divides the working adjacency by its largest entry (no-op on an all-zero graph).
void normalize_by_max(ConnectomeGraph& g);

/// X := A. Each node's feature vector is its adjacency row.
ConnectomeGraph init_node_features(ConnectomeGraph g);

enum class Label : int { wildtype = 0, mutant = 1 };

struct Subject {
    std::string id;
    ConnectomeGraph sc;
    ConnectomeGraph mc;
    Label label = Label::wildtype;

    std::size_t nodes() const { return sc.nodes(); }
    int label_index() const { return static_cast<int>(label); }
};

/// Validates both matrices, max-normalizes them, and initializes features.
Subject make_subject(std::string id, const Matrix& raw_sc, const Matrix& raw_mc, int label);

struct Dataset {
    std::size_t atlas_size = 0;
    std::vector<Subject> subjects;

    /// (label-1 count, label-0 count)
    std::array<std::size_t, 2> class_counts() const;
    const Subject& by_id(const std::string& id) const;
};

Matrix read_matrix_csv(const std::filesystem::path& path);
void write_matrix_csv(const std::filesystem::path& path, const Matrix& m);

/// Reads a manifest and every matrix it references.
Dataset load_dataset(const std::filesystem::path& manifest_path);

/// Accepts either a manifest path or a directory containing manifest.json.
Dataset load_dataset_dir(const std::filesystem::path& path);

/// Writes manifest.json plus <id>_sc.csv / <id>_mc.csv per subject from the raw matrices.
void write_dataset(const std::filesystem::path& dir, const Dataset& dataset);

struct DatasetSplit {
    std::uint64_t seed = 0;
    std::vector<std::string> train;
    std::vector<std::string> val;
    std::vector<std::string> test;
};

inline constexpr std::array<double, 3> kSplitRatio{0.7, 0.1, 0.2};

/// Largest-remainder apportionment of `total` items over `ratio`; ties go to the
/// lower index.
std::vector<std::size_t> largest_remainder(std::size_t total, std::span<const double> ratio);

/// Seeded per-class shuffle followed by a 7:1:2 allocation. Partition totals come
/// from largest-remainder rounding of the subject count; per-class cells are the
/// floor of their exact quota plus at most one extra seat.
DatasetSplit stratified_split(const std::vector<Subject>& subjects, std::uint64_t seed);

void write_split(const std::filesystem::path& path, const DatasetSplit& split);
DatasetSplit read_split(const std::filesystem::path& path);

}  // namespace hiconn
