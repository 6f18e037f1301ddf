#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "embmf/data.hpp"
#include "embmf/ppmi.hpp"

namespace embmf {

// Sidecar written next to the split CSVs; freezes the id -> index maps so
// every later stage shares the same index space.
struct DatasetManifest {
    std::string dataset_name;
    std::string input_path;
    InputFormat format = InputFormat::csv;
    std::uint64_t seed = 0;
    SplitMode mode = SplitMode::in_matrix;
    double percent = 100.0;
    double train_fraction = 0.8;
    double validation_fraction = 0.1;
    double scale_min = 1.0;
    double scale_max = 5.0;

    int n_users = 0;
    int n_items = 0;
    std::size_t n_click_events = 0;
    std::size_t n_ratings_sampled = 0;
    std::size_t n_train = 0;
    std::size_t n_validation = 0;
    std::size_t n_test = 0;
    double rating_density = 0.0;  // sampled ratings / (n_users * n_items)

    IdMap ids;
};

void write_manifest(const std::filesystem::path& path, const DatasetManifest& manifest);
DatasetManifest load_manifest(const std::filesystem::path& path);

// Split CSVs carry the original string ids, one "user,item,rating" row per
// entry, so they are self-contained and re-parseable as generic csv input.
void write_ratings_csv(const std::filesystem::path& path, const SparseRatings& ratings,
                       const IdMap& ids);
SparseRatings load_ratings_csv(const std::filesystem::path& path, const IdMap& ids);

void write_clicks_csv(const std::filesystem::path& path, const ClickLog& log, const IdMap& ids);
ClickLog load_clicks_csv(const std::filesystem::path& path, const IdMap& ids);

// PPMI triples "i,j,value" in index space (both symmetric entries written)
// plus a small JSON sidecar with n_items, nnz and the denominator mode.
void write_ppmi(const std::filesystem::path& csv_path, const std::filesystem::path& meta_path,
                const PpmiMatrix& S, DenominatorMode mode);

struct LoadedPpmi {
    PpmiMatrix matrix;
    DenominatorMode mode = DenominatorMode::user_count;
};

LoadedPpmi load_ppmi(const std::filesystem::path& csv_path, const std::filesystem::path& meta_path);

// Shortest round-trip decimal form of a double (17 significant digits only
// when needed), shared by every writer so identical values serialize
// identically.
std::string format_double(double v);

}  // namespace embmf
