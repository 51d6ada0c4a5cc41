#pragma once

#include "adagent/gateway.hpp"
#include "adagent/memory.hpp"
#include "adagent/offline_stub.hpp"
#include "adagent/registry.hpp"
#include "adagent/session.hpp"
#include "adagent/synth_data.hpp"
#include "adagent/util.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace adagent::test {

// Builds a transcript file from explicit (request, response) pairs.
void write_transcript(const std::filesystem::path& path,
                      const std::vector<std::pair<LLMRequest, LLMResponse>>& records);

// Interpreter for generated pipelines; honors AD_AGENT_TEST_INTERPRETER.
std::string python_interpreter();

// Stage a stub-generated pipeline script for a dataset (no LLM involved).
GeneratedScript make_stub_script(const std::string& model, LibraryId library,
                                 const std::string& train_path,
                                 const std::optional<std::string>& test_path = {},
                                 const std::string& params_json = "{}");

// Session options pre-wired for offline runs inside `dir`: stub backend,
// quiet streams, cache/outputs under dir.
SessionOptions offline_session_options(const std::filesystem::path& dir,
                                       RuleStubBackend::Options stub_options = {});

// Writes dir/data/cardio.mat (200x21, labeled) and returns its path.
std::filesystem::path write_cardio_fixture(const std::filesystem::path& dir);

// Records `command` against the stub into dir/transcript.jsonl (running the
// session in dir) and returns the transcript path. The session must succeed
// unless expect_success is false.
std::filesystem::path record_stub_session(const std::filesystem::path& dir,
                                          const std::string& command,
                                          RuleStubBackend::Options stub_options = {},
                                          bool expect_success = true);

// RAII working-directory switch (sessions resolve ./data, ./generated_scripts
// against the cwd).
class CwdGuard {
public:
    explicit CwdGuard(const std::filesystem::path& to)
        : old_(std::filesystem::current_path()) {
        std::filesystem::current_path(to);
    }
    ~CwdGuard() { std::filesystem::current_path(old_); }

private:
    std::filesystem::path old_;
};

} // namespace adagent::test
