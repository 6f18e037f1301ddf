// Writes a seeded synthetic interaction corpus (MovieLens-like shape) for
// demos, tests and benchmarks.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "embmf/data_io.hpp"
#include "embmf/errors.hpp"
#include "embmf/synth.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Generate synthetic click/rating interactions"};

    embmf::SynthConfig cfg;
    std::string out_path;
    std::string format = "movielens_dat";
    app.add_option("--out", out_path, "Output file")->required();
    app.add_option("--format", format, "movielens_dat or csv");
    app.add_option("--users", cfg.n_users, "Number of users");
    app.add_option("--items", cfg.n_items, "Number of items");
    app.add_option("--events", cfg.n_events, "Total interaction events");
    app.add_option("--seed", cfg.seed, "Generator seed");
    app.add_option("--true-dim", cfg.true_dim, "Latent dimensionality of the ground truth");
    app.add_option("--noise-sd", cfg.noise_sd, "Rating noise stddev");
    app.add_option("--affinity", cfg.affinity, "Click/taste alignment strength");
    app.add_option("--popularity-exponent", cfg.popularity_exponent, "Item popularity skew");
    app.add_option("--min-events-per-user", cfg.min_events_per_user, "Per-user event floor");

    CLI11_PARSE(app, argc, argv);

    try {
        const auto fmt = embmf::input_format_from_string(format);
        auto records = embmf::generate_interactions(cfg);

        std::ofstream out(out_path);
        if (!out) throw embmf::DataError("cannot write " + out_path);
        if (fmt == embmf::InputFormat::csv) out << "user,item,rating,timestamp\n";
        for (const auto& rec : records) {
            if (fmt == embmf::InputFormat::movielens_dat)
                out << rec.user << "::" << rec.item << "::" << embmf::format_double(rec.value)
                    << "::" << rec.timestamp.value_or(0) << "\n";
            else
                out << rec.user << ',' << rec.item << ',' << embmf::format_double(rec.value) << ','
                    << rec.timestamp.value_or(0) << "\n";
        }
        std::cout << "wrote " << records.size() << " events to " << out_path << "\n";
        return 0;
    } catch (const embmf::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
