#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mvqa/asset_library.hpp"
#include "mvqa/eval.hpp"
#include "mvqa/qagen.hpp"

namespace mvqa::client {

struct ModelEndpoint {
    std::string base_url;      // e.g. https://api.example.com/v1
    std::string model_name;
    std::string api_key_env;   // name of the env var holding the secret
    double timeout_s = 60.0;
    int max_retries = 3;
    int max_concurrency = 4;
    double retry_base_s = 1.0;  // exponential backoff base

    static ModelEndpoint load(const std::string& path);
};

enum class PromptMode { Thinking, Direct };

struct Prompt {
    std::string id;  // qid or osd-tag stage key
    std::string text;
    std::vector<std::string> image_paths;
};

struct ProviderResult {
    bool ok = false;
    bool transient = false;  // retry-worthy (429, 5xx, timeouts)
    bool auth_failure = false;
    int http_status = 0;
    std::string text;
    std::string error;
};

class Provider {
public:
    virtual ~Provider() = default;
    virtual ProviderResult complete(const Prompt& prompt) = 0;
    virtual bool wants_images() const { return false; }
    virtual std::string name() const = 0;
};

// Chat-completions JSON over HTTP with base64-embedded images. The API key
// is read from the configured environment variable per request and never
// stored or logged.
class HttpProvider : public Provider {
public:
    explicit HttpProvider(ModelEndpoint endpoint) : endpoint_(std::move(endpoint)) {}
    ProviderResult complete(const Prompt& prompt) override;
    bool wants_images() const override { return true; }
    std::string name() const override { return endpoint_.base_url + " (" + endpoint_.model_name + ")"; }

private:
    ModelEndpoint endpoint_;
};

// Table-driven offline provider. Modes:
//   echo     answers every question with its ground truth
//   garbage  deterministic junk that exercises all parse fallbacks
//   scripted replies from a fixture file: {"replies": {id: {"responses":
//            [..], "fail_429": n}}, "default": "..."}
class MockProvider : public Provider {
public:
    static MockProvider echo(const qa::Dataset& dataset);
    static MockProvider garbage();
    static MockProvider scripted(const std::string& fixture_path);

    ProviderResult complete(const Prompt& prompt) override;
    std::string name() const override { return "mock:" + mode_; }

private:
    struct Script {
        std::vector<std::string> responses;
        int fail_429 = 0;
    };
    std::string mode_;
    std::map<std::string, std::string> echo_answers_;
    std::map<std::string, Script> scripts_;
    std::map<std::string, int> calls_;
    std::string default_reply_;
    std::mutex mu_;
};

struct TranscriptEntry {
    std::string id;
    std::string prompt_digest;  // fnv-1a of the prompt, hex
    std::string raw_response;
    double latency_ms = 0.0;
    int attempts = 0;
    std::string error;  // empty on success
};

struct BenchResult {
    std::vector<eval::Prediction> predictions;   // qid order
    std::vector<TranscriptEntry> transcript;     // qid order

    std::string predictions_jsonl() const;
    std::string transcript_jsonl() const;
};

struct BenchOptions {
    PromptMode mode = PromptMode::Thinking;
    std::uint64_t seed = 0;
    int max_concurrency = 2;
    int max_retries = 3;
    double retry_base_s = 1.0;
    std::string images_root;  // resolved against prediction image paths
    std::function<void(double)> sleep_s;                       // injectable for tests
    const std::map<std::string, TranscriptEntry>* resume = nullptr;  // completed ids to skip
};

std::string build_prompt_text(const qa::QuestionInstance& q, PromptMode mode);

// One prediction per question, qid order, independent of completion timing.
// Throws on provider auth failures; transient failures retry with
// exponential backoff (base x2 with seed-derived jitter) and permanent ones
// yield an explicit empty prediction.
BenchResult run_benchmark(const qa::Dataset& dataset, Provider& provider, const BenchOptions& options);

std::map<std::string, TranscriptEntry> load_transcript(const std::string& path);

// ---- OSD-Tag: three-stage category annotation flow ----

struct OsdCategoryResult {
    std::string category;
    std::string category_name;  // model-provided display name
    std::vector<std::string> comparison_keys;
    std::vector<assets::TagEntry> tags;
    std::map<std::string, std::vector<std::string>> raw_assignments;  // stage-3 output as-is
    std::map<std::string, std::vector<std::string>> assignments;      // after auto-repair
    std::vector<std::string> repairs;
    std::string montage_path;
    std::vector<TranscriptEntry> transcript;
};

class OsdStageError : public std::runtime_error {
public:
    OsdStageError(const std::string& what, std::vector<TranscriptEntry> transcript)
        : std::runtime_error(what), transcript(std::move(transcript)) {}
    std::vector<TranscriptEntry> transcript;
};

// Stage 1: overview montage -> category name + comparison keys.
// Stage 2: multi-level tag library for the category.
// Stage 3: per-asset assignment against the complete library, then
// mechanical auto-repair so the result passes the structural checks.
OsdCategoryResult osd_tag_category(const assets::AssetLibrary& lib, const std::string& category,
                                   const std::map<std::string, std::string>& previews, Provider& provider,
                                   const std::string& work_dir);

// Runs every category and merges the results into a new manifest document.
std::string osd_tag_manifest(const assets::AssetLibrary& lib,
                             const std::map<std::string, std::string>& previews, Provider& provider,
                             const std::string& work_dir, std::vector<std::string>* log = nullptr);

// Simple synthetic preview for box-shaped placeholder assets (used when no
// preview images are supplied).
std::string render_asset_preview(const assets::AssetLibrary& lib, const assets::AssetRecord& rec,
                                 const std::string& out_dir);

std::string prompt_digest(const Prompt& prompt);

}  // namespace mvqa::client
