#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace embmf {

// One line of a raw interaction file. value == 0 means a click-only event
// (implicit feedback, no rating attached).
struct InteractionRecord {
    std::string user;
    std::string item;
    double value = 0.0;
    std::optional<std::int64_t> timestamp;
};

enum class InputFormat { movielens_dat, csv };

std::string to_string(InputFormat f);
InputFormat input_format_from_string(const std::string& s);

// Reads a raw interaction file. movielens_dat lines look like
// "user::item::rating::timestamp"; csv files carry a header row
// "user,item,rating[,timestamp]". Malformed lines raise ParseError with the
// line number; an empty file is an error.
std::vector<InteractionRecord> parse_interactions(const std::filesystem::path& path,
                                                  InputFormat format);

// Stable string id -> dense index mapping, frozen over the union of all
// ingested records so item indices are shared between the click side and the
// rating side. Indices follow first appearance order.
class IdMap {
public:
    IdMap() = default;

    static IdMap from_records(const std::vector<InteractionRecord>& records);

    int user_count() const { return static_cast<int>(user_ids_.size()); }
    int item_count() const { return static_cast<int>(item_ids_.size()); }

    int add_user(const std::string& id);
    int add_item(const std::string& id);

    std::optional<int> user_index(const std::string& id) const;
    std::optional<int> item_index(const std::string& id) const;

    const std::string& user_id(int index) const { return user_ids_.at(index); }
    const std::string& item_id(int index) const { return item_ids_.at(index); }

    const std::vector<std::string>& user_ids() const { return user_ids_; }
    const std::vector<std::string>& item_ids() const { return item_ids_; }

private:
    std::vector<std::string> user_ids_;
    std::vector<std::string> item_ids_;
    std::unordered_map<std::string, int> user_to_index_;
    std::unordered_map<std::string, int> item_to_index_;
};

struct RatingTriple {
    int user = 0;
    int item = 0;
    double rating = 0.0;

    friend bool operator==(const RatingTriple&, const RatingTriple&) = default;
};

// Observed ratings with both adjacency views. by_user/by_item are exact
// transposes of the entry list; (user, item) pairs are unique.
class SparseRatings {
public:
    SparseRatings() = default;

    static SparseRatings from_triples(int n_users, int n_items,
                                      std::vector<RatingTriple> entries);

    int n_users() const { return n_users_; }
    int n_items() const { return n_items_; }
    const std::vector<RatingTriple>& entries() const { return entries_; }
    double global_mean() const { return global_mean_; }

    const std::vector<std::pair<int, double>>& by_user(int u) const { return by_user_.at(u); }
    const std::vector<std::pair<int, double>>& by_item(int i) const { return by_item_.at(i); }

    bool empty() const { return entries_.empty(); }
    std::size_t size() const { return entries_.size(); }

    // Re-checks the structural invariants; throws DataError on violation.
    void validate() const;

private:
    int n_users_ = 0;
    int n_items_ = 0;
    std::vector<RatingTriple> entries_;
    std::vector<std::vector<std::pair<int, double>>> by_user_;
    std::vector<std::vector<std::pair<int, double>>> by_item_;
    double global_mean_ = 0.0;
};

// Per-user clicked item sets (user-based context). Item lists are sorted and
// duplicate-free: a user clicking an item twice counts once.
struct ClickLog {
    int n_users = 0;
    int n_items = 0;
    std::vector<std::vector<int>> clicks_by_user;

    std::size_t total_clicks() const;
};

// Every record, rated or click-only, contributes to the click log.
ClickLog binarize_to_clicks(const std::vector<InteractionRecord>& records, const IdMap& ids);

// Uniform subsample (without replacement) of floor(eligible * percent / 100)
// rated records; click-only records carry no rating and are never eligible.
SparseRatings subsample_ratings(const std::vector<InteractionRecord>& records, const IdMap& ids,
                                double percent, std::uint64_t seed);

enum class SplitMode { in_matrix, out_matrix };

std::string to_string(SplitMode m);
SplitMode split_mode_from_string(const std::string& s);

struct SplitSpec {
    SplitMode mode = SplitMode::in_matrix;
    double train_fraction = 0.8;
    double validation_fraction_of_train = 0.1;
    std::uint64_t seed = 0;
};

struct Splits {
    SparseRatings train;
    SparseRatings validation;
    SparseRatings test;
};

// Train/validation/test partition of the rating entries.
//
// in_matrix: entries are split at random, then test entries whose item has no
// training rating are moved back to train, so every test item appears in
// train. Validation is carved from train the same way.
//
// out_matrix: items are split at random; every rating of a held-out item goes
// to test, so test and train item sets are disjoint. Validation is carved
// from train as in in_matrix.
Splits split_ratings(const SparseRatings& ratings, const SplitSpec& spec);

}  // namespace embmf
