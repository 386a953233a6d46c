#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "mvqa/relations.hpp"
#include "mvqa/scene.hpp"
#include "mvqa/view_render.hpp"

namespace mvqa::qa {

enum class Task { MCQ, Counting, Detection };
const char* to_string(Task t);
std::optional<Task> task_from_string(const std::string& s);

// One slot-filling alternative for a Ground step. `phrase` is the noun
// phrase used in question text; empty means "use the asset display name".
struct GroundVariant {
    std::vector<std::string> tags;
    std::string category;
    std::string phrase;
};

struct PlanStep {
    enum class Kind { Ground, Hop, Aggregate, Localize };
    Kind kind = Kind::Ground;
    std::string slot;       // binding produced by this step
    std::string from_slot;  // Hop/Aggregate/Localize input
    std::string to_slot;    // Hop with pre-bound endpoint (relation queries)

    // Ground
    std::vector<GroundVariant> variants;
    bool unique = true;
    bool require_front = false;
    bool in_view = false;  // restrict pool to objects visible in the chosen view

    // Hop; label "?" queries the relation (the MCQ answer), "*" lets the
    // resolver pick any label with a unique target.
    std::string label;
    std::string frame = "object";   // "object" | "camera"
    std::string family = "horizontal";  // "horizontal" | "cam-side" | "cam-depth" | "contact"
    std::vector<std::string> filter_tags;
    std::string filter_category;
};

struct QuestionTemplate {
    std::string template_id;
    Task task = Task::MCQ;
    std::string text;  // "{slot}", "{label*}", "{view}", "{dview}" placeholders
    std::vector<PlanStep> plan;
    int option_count = 4;        // MCQ only, 2..4
    std::string options_denote = "labels";  // "labels" | "objects"
    int view_count = 2;

    static QuestionTemplate from_json_text(const std::string& text, const std::string& context);
    static std::vector<QuestionTemplate> load_dir(const std::string& dir);
};

struct OptionDenotation {
    std::string kind;   // "label" | "object" | "count"
    std::string value;  // canonical label string or instance id
};

struct EvidenceRef {
    std::string view_id;
    std::string instance_id;
    geom::Bbox2 bbox;
};

struct TraceStep {
    std::string text;
    std::vector<EvidenceRef> evidence;
    bool cross_view = false;  // emitted from level 3 upward
};

struct SupervisionTrace {
    int level = 1;
    std::vector<TraceStep> steps;
    std::string final_answer;
};

// Machine-checkable semantics of the instantiated question, carried in the
// dataset so the verifier can re-derive the answer from raw geometry without
// touching generation code.
struct Grounding {
    std::string form;  // relation_query | object_query | pair_order | count_where | locate
    std::string frame = "object";
    std::string ref;
    std::string target;
    std::vector<std::string> chain;   // ref..target instances along hops
    std::vector<std::string> labels;  // hop labels along the chain
    std::string view_id;              // camera-frame hop / localize view
    std::vector<std::string> tags;    // counting pool filter
    std::string category;
    bool pool_in_view = false;
    std::vector<std::string> pool;    // counted instances
};

struct QuestionInstance {
    std::string qid;
    std::string scene_id;
    std::string template_id;
    std::vector<std::string> view_ids;  // cited views, presentation order
    Task task = Task::MCQ;
    std::string text;
    std::vector<std::string> options;
    std::vector<OptionDenotation> option_denotations;
    int answer_index = -1;                                       // MCQ
    long long count_answer = 0;                                  // Counting
    std::vector<std::pair<std::string, geom::Bbox2>> gt_boxes;   // Detection
    double reasoning_difficulty = 0.0;
    double visibility_difficulty = 0.0;
    std::vector<std::string> key_objects;
    bool sparse = false;
    int image_width = 0;
    int image_height = 0;
    Grounding grounding;
    std::optional<SupervisionTrace> supervision;

    // Level-4 material captured at instantiation; emit_supervision slices it.
    std::vector<TraceStep> full_trace;
    std::string final_answer_text;

    std::string to_jsonl() const;
};

// Everything qagen needs about one rendered scene.
struct SceneBundle {
    scene::SceneInstance scene;
    std::vector<scene::ObjectGeom> geoms;
    render::SceneViewData views;
    rel::SceneGraphs graphs;
    const assets::AssetLibrary* lib = nullptr;

    const scene::ObjectGeom* geom_of(const std::string& instance_id) const;
    const scene::PlacedObject* object_of(const std::string& instance_id) const;
};

SceneBundle make_bundle(scene::SceneInstance scene, const assets::AssetLibrary& lib,
                        render::SceneViewData views, const rel::RelationParams& params = {});

// Difficulty: D = H + coeff * log2(max(N, 1)). Ground and Localize steps
// count one hop each; Hop steps contribute BFS shortest-path lengths over
// the relevant graph. Throws when a hop endpoint is unreachable.
struct ResolvedStep {
    PlanStep::Kind kind = PlanStep::Kind::Ground;
    std::string frame = "object";   // object | camera
    std::string view_id;            // camera-frame hops
    std::string from;               // hop source instance
    std::vector<std::string> to;    // hop targets (may be empty for zero counts)
};

double reasoning_difficulty(const std::vector<ResolvedStep>& plan, const rel::SceneGraphs& graphs,
                            const std::set<std::string>& key_objects, double log_coeff = 1.0);

struct GenPolicy {
    std::string sparse_policy = "prefer";  // prefer | require | off
    double difficulty_log_coeff = 1.0;
    int max_bindings_per_scene_template = 6;
};

// All deterministic instantiations of a template on one scene, capped by
// policy. `seed` drives option shuffles and binding subsampling only.
std::vector<QuestionInstance> enumerate_candidates(const QuestionTemplate& tmpl, const SceneBundle& bundle,
                                                   std::uint64_t seed, const GenPolicy& policy);

// First candidate or absent; the spec-level single-question operation.
std::optional<QuestionInstance> instantiate_question(const QuestionTemplate& tmpl, const SceneBundle& bundle,
                                                     std::uint64_t seed, const GenPolicy& policy = {});

SupervisionTrace emit_supervision(const QuestionInstance& q, int level);

struct GenTargets {
    long long mcq = 0;
    long long counting = 0;
    long long detection = 0;
    int supervision_level = 0;  // 0 = omit
    GenPolicy policy;
    double mcq_tolerance_pp = 5.0;
    double counting_max_mass = 0.40;

    static GenTargets load(const std::string& path);
};

struct Dataset {
    std::vector<QuestionInstance> questions;  // ordered by qid
    std::string shortfall_report;             // empty when all targets met

    std::string to_jsonl() const;
};

Dataset generate_dataset(const std::vector<SceneBundle>& bundles,
                         const std::vector<QuestionTemplate>& templates, const GenTargets& targets,
                         std::uint64_t seed, int jobs = 1);

// Independent re-derivation from raw geometry (geometry + relations modules
// only). Populates `reason` on failure.
bool verify_answer(const QuestionInstance& q, const SceneBundle& bundle, std::string* reason = nullptr);

// Dataset file parsing (shared data model, no generation logic).
QuestionInstance question_from_jsonl(const std::string& line, const std::string& context);
Dataset load_dataset(const std::string& path);

}  // namespace mvqa::qa
