// Regenerates the bundled demo fixtures: the miniature cardio-like dataset
// and the replay transcript of the "Run VAE on cardio.mat" session recorded
// against the offline stub backend. Run after changing any agent prompt, or
// the bundled transcript keys will no longer match.
#include "adagent/offline_stub.hpp"
#include "adagent/session.hpp"
#include "adagent/synth_data.hpp"
#include "adagent/util.hpp"

#include "CLI11.hpp"

#include <filesystem>
#include <iostream>

namespace fs = std::filesystem;
using namespace adagent;

int main(int argc, char** argv) {
    CLI::App app{"regenerate bundled fixtures"};
    std::string repo_root = ".";
    app.add_option("--repo-root", repo_root, "repository root to write into");
    CLI11_PARSE(app, argc, argv);

    try {
        const fs::path root = fs::absolute(repo_root);

        // 200 x 21 labeled, cardio-like prevalence
        const TabularData cardio = make_gaussian_tabular(200, 21, 0.096, 4.0, 0, 0xca4d10);
        const fs::path mat_path = root / "data" / "cardio.mat";
        fs::create_directories(mat_path.parent_path());
        write_mat_tabular(mat_path, cardio.x, cardio.labels);
        std::cout << "wrote " << mat_path << "\n";

        // record the demo session against the stub in a scratch working dir
        TempDir scratch("adagent-fixtures");
        fs::create_directories(scratch.path() / "data");
        fs::copy_file(mat_path, scratch.path() / "data" / "cardio.mat");
        const fs::path old_cwd = fs::current_path();
        fs::current_path(scratch.path());

        SessionOptions options;
        options.backend = BackendKind::record;
        options.transcript_path = (scratch.path() / "transcript.jsonl").string();
        options.cache_path = "./demo_cache.json";
        options.injected_backend = std::make_shared<RuleStubBackend>();

        const SessionResult result = run_session(std::string("Run VAE on cardio.mat"), options);
        fs::current_path(old_cwd);
        if (result.exit_code != 0) {
            std::cerr << "fixture session failed\n";
            return 1;
        }

        const fs::path transcript_out = root / "assets" / "transcripts" / "vae_cardio.jsonl";
        fs::create_directories(transcript_out.parent_path());
        fs::copy_file(scratch.path() / "transcript.jsonl", transcript_out,
                      fs::copy_options::overwrite_existing);
        std::cout << "wrote " << transcript_out << "\n";
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
