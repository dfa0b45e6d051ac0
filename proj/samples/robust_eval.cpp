// Build the robust split of the bundled fixture, run the untrained toy model
// over every sentence and score it.
//
//   rris_sample [annotations.json]

#include <iostream>

#include "rris/cli.hpp"
#include "rris/rris.hpp"

int main(int argc, char** argv) {
    const std::string path = argc > 1 ? argv[1] : "data/fixture_annotations.json";
    try {
        const rris::RobustDataset ds = rris::load_annotations(path);
        rris::BuildOptions opts;
        opts.seed = 7;
        const rris::RobustDataset robust = rris::build_robust_split(ds, opts);

        const auto& first = robust.references.front();
        std::cout << "\"" << first.sentences.front() << "\" gets negatives:\n";
        for (const auto& n : first.negatives) std::cout << "  " << rris::to_string(n.strategy) << ": " << n.text << "\n";

        const auto preds = rris::cli::synthetic_predictions(robust, rris::refseg::ModelConfig{}, opts.seed);
        const auto join = rris::join_predictions(robust, preds);
        std::cout << "\n" << rris::report_table(rris::aggregate_report(join.references));
    } catch (const rris::Error& e) {
        std::cerr << e.what() << "\n";
        return 2;
    }
}
