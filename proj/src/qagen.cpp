#include "mvqa/qagen.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <sstream>

#include <nlohmann/json.hpp>

#include "mvqa/json_io.hpp"
#include "mvqa/parallel.hpp"
#include "mvqa/rng.hpp"

namespace mvqa::qa {

const char* to_string(Task t) {
    switch (t) {
        case Task::MCQ: return "mcq";
        case Task::Counting: return "counting";
        case Task::Detection: return "detection";
    }
    return "?";
}

std::optional<Task> task_from_string(const std::string& s) {
    if (s == "mcq") return Task::MCQ;
    if (s == "counting") return Task::Counting;
    if (s == "detection") return Task::Detection;
    return std::nullopt;
}

namespace {

// Phrase used when a label appears inline ("... {label} of the X").
const char* label_inline(rel::Label l) {
    switch (l) {
        case rel::Label::Front: return "in front of";
        case rel::Label::Back: return "behind";
        case rel::Label::Left: return "to the left of";
        case rel::Label::Right: return "to the right of";
        case rel::Label::FrontLeft: return "ahead-left of";
        case rel::Label::FrontRight: return "ahead-right of";
        case rel::Label::BackLeft: return "back-left of";
        case rel::Label::BackRight: return "back-right of";
        case rel::Label::On: return "on top of";
        case rel::Label::Under: return "underneath";
        case rel::Label::CamLeft: return "left of";
        case rel::Label::CamRight: return "right of";
        case rel::Label::CamCloser: return "closer than";
        case rel::Label::CamFarther: return "farther than";
    }
    return "?";
}

// Phrase used as an MCQ option for a direction answer.
const char* label_option(rel::Label l) {
    switch (l) {
        case rel::Label::Front: return "directly in front";
        case rel::Label::Back: return "directly behind";
        case rel::Label::Left: return "to its left";
        case rel::Label::Right: return "to its right";
        case rel::Label::FrontLeft: return "in front, off to its left";
        case rel::Label::FrontRight: return "in front, off to its right";
        case rel::Label::BackLeft: return "behind, off to its left";
        case rel::Label::BackRight: return "behind, off to its right";
        case rel::Label::CamLeft: return "to the left";
        case rel::Label::CamRight: return "to the right";
        default: return label_inline(l);
    }
}

const std::vector<rel::Label>& horizontal_labels() {
    static const std::vector<rel::Label> kAll = {
        rel::Label::Front,     rel::Label::Back,      rel::Label::Left,     rel::Label::Right,
        rel::Label::FrontLeft, rel::Label::FrontRight, rel::Label::BackLeft, rel::Label::BackRight,
    };
    return kAll;
}

void replace_all(std::string& text, const std::string& from, const std::string& to) {
    std::size_t pos = 0;
    while ((pos = text.find(from, pos)) != std::string::npos) {
        text.replace(pos, from.size(), to);
        pos += to.size();
    }
}

}  // namespace

QuestionTemplate QuestionTemplate::from_json_text(const std::string& text, const std::string& context) {
    nlohmann::json j = parse_json_text(text, context);
    QuestionTemplate t;
    t.template_id = require_string(j, "template_id", context);
    auto task = task_from_string(require_string(j, "task", context));
    if (!task) throw ParseError(context + ": unknown task");
    t.task = *task;
    t.text = require_string(j, "text", context);
    t.option_count = static_cast<int>(j.value("option_count", 4));
    if (t.task == Task::MCQ && (t.option_count < 2 || t.option_count > 4))
        throw ParseError(context + ": option_count must be in [2,4]");
    t.options_denote = j.value("options_denote", std::string("labels"));
    t.view_count = static_cast<int>(j.value("view_count", 2));
    if (t.view_count < 1) throw ParseError(context + ": view_count must be >= 1");

    for (const auto& js : require_field(j, "plan", context)) {
        PlanStep step;
        std::string kind = require_string(js, "kind", context + " plan step");
        if (kind == "ground") step.kind = PlanStep::Kind::Ground;
        else if (kind == "hop") step.kind = PlanStep::Kind::Hop;
        else if (kind == "aggregate") step.kind = PlanStep::Kind::Aggregate;
        else if (kind == "localize") step.kind = PlanStep::Kind::Localize;
        else throw ParseError(context + ": unknown plan step kind '" + kind + "'");
        step.slot = js.value("slot", std::string());
        step.from_slot = js.value("from", std::string());
        step.to_slot = js.value("to", std::string());
        step.unique = js.value("unique", true);
        step.require_front = js.value("require_front", false);
        step.in_view = js.value("in_view", false);
        step.label = js.value("label", std::string());
        step.frame = js.value("frame", std::string("object"));
        step.family = js.value("family", std::string("horizontal"));
        if (js.contains("variants")) {
            for (const auto& jv : js["variants"]) {
                GroundVariant v;
                for (const auto& tag : jv.value("tags", nlohmann::json::array())) v.tags.push_back(tag.get<std::string>());
                v.category = jv.value("category", std::string());
                v.phrase = jv.value("phrase", std::string());
                step.variants.push_back(std::move(v));
            }
        } else if (step.kind == PlanStep::Kind::Ground) {
            GroundVariant v;
            for (const auto& tag : js.value("tags", nlohmann::json::array())) v.tags.push_back(tag.get<std::string>());
            v.category = js.value("category", std::string());
            v.phrase = js.value("phrase", std::string());
            step.variants.push_back(std::move(v));
        }
        for (const auto& tag : js.value("filter_tags", nlohmann::json::array()))
            step.filter_tags.push_back(tag.get<std::string>());
        step.filter_category = js.value("filter_category", std::string());
        t.plan.push_back(std::move(step));
    }
    if (t.plan.empty()) throw ParseError(context + ": plan must not be empty");
    if (t.task == Task::Detection && t.plan.back().kind != PlanStep::Kind::Localize)
        throw ParseError(context + ": detection plans must end in a localize step");
    if (t.task == Task::Counting && t.plan.back().kind != PlanStep::Kind::Aggregate)
        throw ParseError(context + ": counting plans must end in an aggregate step");
    return t;
}

std::vector<QuestionTemplate> QuestionTemplate::load_dir(const std::string& dir) {
    std::vector<std::string> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path().string());
    std::sort(files.begin(), files.end());
    std::vector<QuestionTemplate> out;
    for (const auto& f : files) out.push_back(from_json_text(read_text_file(f), f));
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.template_id < b.template_id; });
    for (std::size_t i = 1; i < out.size(); ++i)
        if (out[i].template_id == out[i - 1].template_id)
            throw ParseError(dir + ": duplicate template_id '" + out[i].template_id + "'");
    return out;
}

const scene::ObjectGeom* SceneBundle::geom_of(const std::string& instance_id) const {
    for (const auto& g : geoms)
        if (g.instance_id == instance_id) return &g;
    return nullptr;
}

const scene::PlacedObject* SceneBundle::object_of(const std::string& instance_id) const {
    for (const auto& o : scene.objects)
        if (o.instance_id == instance_id) return &o;
    return nullptr;
}

SceneBundle make_bundle(scene::SceneInstance scene_in, const assets::AssetLibrary& lib,
                        render::SceneViewData views, const rel::RelationParams& params) {
    SceneBundle b;
    b.scene = std::move(scene_in);
    b.lib = &lib;
    b.geoms = scene::resolve_geometry(b.scene, lib);
    b.views = std::move(views);
    b.graphs = rel::build_relation_graphs(b.geoms, b.views.view_cameras(), b.views.frustum_index(), params);
    return b;
}

double reasoning_difficulty(const std::vector<ResolvedStep>& plan, const rel::SceneGraphs& graphs,
                            const std::set<std::string>& key_objects, double log_coeff) {
    long long hops = 0;
    for (const auto& step : plan) {
        switch (step.kind) {
            case PlanStep::Kind::Ground:
            case PlanStep::Kind::Localize:
                hops += 1;  // a perceptual grounding step is one hop
                break;
            case PlanStep::Kind::Aggregate:
                break;
            case PlanStep::Kind::Hop: {
                const rel::RelationGraph* graph = nullptr;
                if (step.frame == "camera") {
                    graph = graphs.view_graph(step.view_id);
                    if (!graph) throw std::runtime_error("reasoning_difficulty: no graph for view " + step.view_id);
                } else {
                    graph = &graphs.object_centric;
                }
                if (step.to.empty()) {
                    hops += 1;  // attempted relational check over an empty match set
                    break;
                }
                int worst = 1;
                for (const auto& target : step.to) {
                    auto d = rel::hop_distance(*graph, step.from, target);
                    if (!d)
                        throw std::runtime_error("reasoning_difficulty: '" + target + "' unreachable from '" +
                                                 step.from + "'");
                    worst = std::max(worst, *d);
                }
                hops += worst;
                break;
            }
        }
    }
    double n = static_cast<double>(std::max<std::size_t>(key_objects.size(), 1));
    return static_cast<double>(hops) + log_coeff * std::log2(n);
}

namespace {

struct SlotBinding {
    std::string instance;
    std::string phrase;
};

// Scene instances uniquely nameable by one asset's display name.
std::vector<SlotBinding> unique_ground_candidates(const SceneBundle& bundle, const GroundVariant& variant,
                                                  bool require_front) {
    const auto& lib = *bundle.lib;
    std::set<std::string> matching_assets;
    if (!variant.tags.empty() || !variant.category.empty()) {
        std::set<std::string> tags(variant.tags.begin(), variant.tags.end());
        auto ids = assets::query_assets_by_tags(
            lib, tags, variant.category.empty() ? std::nullopt : std::optional<std::string>(variant.category));
        matching_assets.insert(ids.begin(), ids.end());
    } else {
        for (const auto& a : lib.all_assets()) matching_assets.insert(a.asset_id);
    }

    std::map<std::string, int> asset_count, name_count;
    for (const auto& o : bundle.scene.objects) {
        ++asset_count[o.asset_id];
        ++name_count[lib.asset(o.asset_id).display_name];
    }

    std::vector<SlotBinding> out;
    if (!variant.phrase.empty()) {
        // Explicit phrase: the whole query must resolve to exactly one
        // instance in the scene.
        std::vector<std::string> hits;
        for (const auto& o : bundle.scene.objects)
            if (matching_assets.count(o.asset_id)) hits.push_back(o.instance_id);
        if (hits.size() == 1) {
            const auto* g = bundle.geom_of(hits[0]);
            if (!require_front || g->has_front) out.push_back({hits[0], variant.phrase});
        }
        return out;
    }
    for (const auto& o : bundle.scene.objects) {
        if (!matching_assets.count(o.asset_id)) continue;
        const assets::AssetRecord& rec = lib.asset(o.asset_id);
        if (require_front && !rec.has_front) continue;
        if (asset_count[o.asset_id] != 1) continue;       // ambiguous instance
        if (name_count[rec.display_name] != 1) continue;  // ambiguous wording
        out.push_back({o.instance_id, rec.display_name});
    }
    return out;
}

std::vector<std::string> pool_members(const SceneBundle& bundle, const GroundVariant& variant) {
    const auto& lib = *bundle.lib;
    std::set<std::string> tags(variant.tags.begin(), variant.tags.end());
    std::set<std::string> matching;
    auto ids = assets::query_assets_by_tags(
        lib, tags, variant.category.empty() ? std::nullopt : std::optional<std::string>(variant.category));
    matching.insert(ids.begin(), ids.end());
    std::vector<std::string> out;
    for (const auto& o : bundle.scene.objects)
        if (matching.count(o.asset_id)) out.push_back(o.instance_id);
    return out;
}

bool instance_matches_filter(const SceneBundle& bundle, const std::string& instance,
                             const std::vector<std::string>& tags, const std::string& category) {
    const auto* obj = bundle.object_of(instance);
    const assets::AssetRecord& rec = bundle.lib->asset(obj->asset_id);
    if (!category.empty() && rec.category != category) return false;
    for (const auto& t : tags)
        if (!std::binary_search(rec.tags.begin(), rec.tags.end(), t)) return false;
    return true;
}

// Targets adjacent to `from` via edges {subject: target, object: from, label}.
std::vector<std::string> hop_targets(const rel::RelationGraph& graph, const std::string& from,
                                     rel::Label label) {
    std::vector<std::string> out;
    for (const auto& e : graph.edges)
        if (e.object == from && e.label == label) out.push_back(e.subject);
    return out;
}

struct ViewChoice {
    std::vector<std::string> cited;  // presentation order
    bool sparse = false;
};

bool object_visible(const SceneBundle& bundle, const std::string& view, const std::string& instance) {
    const auto* m = bundle.views.find(view, instance);
    return m && m->in_frustum;
}

std::optional<ViewChoice> choose_views(const SceneBundle& bundle, int k,
                                       const std::set<std::string>& key_objects,
                                       const std::vector<std::string>& required_views,
                                       const std::string& sparse_policy, Rng& rng) {
    std::vector<std::string> all;
    for (const auto& v : bundle.views.views) all.push_back(v.view_id);
    std::sort(all.begin(), all.end());
    int n = static_cast<int>(all.size());
    if (n < k) return std::nullopt;

    std::vector<std::vector<int>> subsets;
    std::vector<int> idx(k);
    std::function<void(int, int)> rec = [&](int start, int depth) {
        if (depth == k) {
            subsets.push_back(idx);
            return;
        }
        for (int i = start; i < n; ++i) {
            idx[depth] = i;
            rec(i + 1, depth + 1);
        }
    };
    rec(0, 0);
    rng.shuffle(subsets);

    auto valid = [&](const std::vector<int>& subset) {
        for (const auto& req : required_views) {
            bool found = false;
            for (int i : subset)
                if (all[i] == req) found = true;
            if (!found) return false;
        }
        for (const auto& obj : key_objects) {
            bool seen = false;
            for (int i : subset)
                if (object_visible(bundle, all[i], obj)) seen = true;
            if (!seen) return false;
        }
        return true;
    };
    auto sparse_ok = [&](const std::vector<int>& subset) {
        // No single cited view may show every key object nearly unoccluded.
        for (int i : subset) {
            bool all_clear = true;
            for (const auto& obj : key_objects) {
                const auto* m = bundle.views.find(all[i], obj);
                if (!m || !m->in_frustum || m->occlusion_ratio >= 0.1) {
                    all_clear = false;
                    break;
                }
            }
            if (all_clear && !key_objects.empty()) return false;
        }
        return true;
    };

    const std::vector<int>* fallback = nullptr;
    for (const auto& subset : subsets) {
        if (!valid(subset)) continue;
        if (sparse_policy != "off" && sparse_ok(subset)) {
            ViewChoice choice;
            for (int i : subset) choice.cited.push_back(all[i]);
            choice.sparse = true;
            return choice;
        }
        if (!fallback) fallback = &subset;
        if (sparse_policy == "off") break;
    }
    if (!fallback || sparse_policy == "require") return std::nullopt;
    ViewChoice choice;
    for (int i : *fallback) choice.cited.push_back(all[i]);
    choice.sparse = false;
    return choice;
}

int view_position(const std::vector<std::string>& cited, const std::string& view) {
    for (std::size_t i = 0; i < cited.size(); ++i)
        if (cited[i] == view) return static_cast<int>(i) + 1;
    return 0;
}

std::string view_name(const std::vector<std::string>& cited, const std::string& view) {
    return "view " + std::to_string(view_position(cited, view));
}

struct BuildContext {
    const QuestionTemplate* tmpl = nullptr;
    const SceneBundle* bundle = nullptr;
    const GenPolicy* policy = nullptr;
    std::uint64_t seed = 0;
};

// Evidence for one object in one view, when visible.
std::optional<EvidenceRef> evidence_in(const SceneBundle& bundle, const std::string& view,
                                       const std::string& instance) {
    const auto* m = bundle.views.find(view, instance);
    if (!m || !m->in_frustum || !m->bbox2) return std::nullopt;
    return EvidenceRef{view, instance, *m->bbox2};
}

std::vector<EvidenceRef> all_evidence(const SceneBundle& bundle, const std::vector<std::string>& cited,
                                      const std::string& instance) {
    std::vector<EvidenceRef> out;
    for (const auto& v : cited)
        if (auto e = evidence_in(bundle, v, instance)) out.push_back(*e);
    return out;
}

std::string join_views(const SceneBundle& bundle, const std::vector<std::string>& cited,
                       const std::string& instance) {
    std::string out;
    for (std::size_t i = 0; i < cited.size(); ++i) {
        if (!object_visible(bundle, cited[i], instance)) continue;
        if (!out.empty()) out += " and ";
        out += "view " + std::to_string(i + 1);
    }
    return out.empty() ? "none of the views directly" : out;
}

}  // namespace

std::vector<QuestionInstance> enumerate_candidates(const QuestionTemplate& tmpl, const SceneBundle& bundle,
                                                   std::uint64_t seed, const GenPolicy& policy) {
    std::vector<QuestionInstance> out;
    if (bundle.views.views.size() < 2) return out;  // the engine is multi-view by contract

    // Candidate bindings for unique ground steps: cartesian product of
    // per-step candidate lists, distinct instances across slots.
    std::vector<const PlanStep*> ground_steps;
    for (const auto& s : tmpl.plan)
        if (s.kind == PlanStep::Kind::Ground && s.unique && !s.in_view) ground_steps.push_back(&s);

    std::vector<std::vector<SlotBinding>> per_step;
    for (const auto* s : ground_steps) {
        std::vector<SlotBinding> cands;
        for (const auto& variant : s->variants) {
            auto vc = unique_ground_candidates(bundle, variant, s->require_front);
            cands.insert(cands.end(), vc.begin(), vc.end());
        }
        if (cands.empty()) return out;
        per_step.push_back(std::move(cands));
    }

    std::vector<std::vector<const SlotBinding*>> bindings;
    std::vector<const SlotBinding*> current(per_step.size());
    std::function<void(std::size_t)> expand = [&](std::size_t depth) {
        if (depth == per_step.size()) {
            std::set<std::string> seen;
            for (const auto* b : current)
                if (!seen.insert(b->instance).second) return;
            bindings.push_back(current);
            return;
        }
        for (const auto& cand : per_step[depth]) {
            current[depth] = &cand;
            expand(depth + 1);
        }
    };
    expand(0);
    if (bindings.empty()) return out;

    Rng binding_rng(derive_seed(seed, {bundle.scene.scene_id, tmpl.template_id, "bindings"}));
    binding_rng.shuffle(bindings);

    std::vector<std::string> all_views;
    for (const auto& v : bundle.views.views) all_views.push_back(v.view_id);
    std::sort(all_views.begin(), all_views.end());

    int emitted = 0;
    for (std::size_t bi = 0; bi < bindings.size() && emitted < policy.max_bindings_per_scene_template; ++bi) {
        Rng rng(derive_seed(seed, {bundle.scene.scene_id, tmpl.template_id, "inst", std::to_string(bi)}));

        QuestionInstance q;
        q.scene_id = bundle.scene.scene_id;
        q.template_id = tmpl.template_id;
        q.task = tmpl.task;
        q.image_width = bundle.views.views.front().camera.width;
        q.image_height = bundle.views.views.front().camera.height;

        std::map<std::string, SlotBinding> slots;
        for (std::size_t gi = 0; gi < ground_steps.size(); ++gi) slots[ground_steps[gi]->slot] = *bindings[bi][gi];

        std::set<std::string> key_objects;
        for (const auto& [_, b] : slots) key_objects.insert(b.instance);

        // Trace steps carry the instances whose per-view bboxes become
        // evidence once the citation set is known ("@pool" = pool members).
        struct PendingTrace {
            TraceStep step;
            std::vector<std::string> instances;
        };
        std::vector<PendingTrace> trace;
        std::vector<ResolvedStep> resolved;
        Grounding& gr = q.grounding;
        std::string text = tmpl.text;
        bool failed = false;

        const PlanStep* cam_hop = nullptr;
        const PlanStep* pool_step = nullptr;
        for (const auto& s : tmpl.plan) {
            if (s.kind == PlanStep::Kind::Hop && s.frame == "camera") cam_hop = &s;
            if (s.kind == PlanStep::Kind::Ground && (s.in_view || !s.unique)) pool_step = &s;
        }

        // Camera-frame hops and in-view pools fix a measurement view before
        // the citation set is chosen.
        std::vector<std::string> required_views;
        std::string cam_view;
        if (cam_hop) {
            std::vector<std::string> shuffled = all_views;
            rng.shuffle(shuffled);
            const std::string& a = slots[cam_hop->from_slot].instance;
            const std::string& b = slots[cam_hop->to_slot].instance;
            for (const auto& v : shuffled) {
                if (!object_visible(bundle, v, a) || !object_visible(bundle, v, b)) continue;
                const auto* graph = bundle.graphs.view_graph(v);
                if (!graph) continue;
                for (const auto& e : graph->edges) {
                    if (e.subject != a || e.object != b) continue;
                    bool side = e.label == rel::Label::CamLeft || e.label == rel::Label::CamRight;
                    bool depth = e.label == rel::Label::CamCloser || e.label == rel::Label::CamFarther;
                    if ((cam_hop->family == "cam-side" && side) || (cam_hop->family == "cam-depth" && depth)) {
                        cam_view = v;
                        break;
                    }
                }
                if (!cam_view.empty()) break;
            }
            if (cam_view.empty()) continue;  // pair indeterminate everywhere
            required_views.push_back(cam_view);
        }
        std::string pool_view;
        if (pool_step && pool_step->in_view) {
            std::vector<std::string> shuffled = all_views;
            rng.shuffle(shuffled);
            pool_view = shuffled.front();
            required_views.push_back(pool_view);
        }

        int pool_resolved_idx = -1;
        for (const auto& s : tmpl.plan) {
            if (failed) break;
            switch (s.kind) {
                case PlanStep::Kind::Ground: {
                    if (s.unique && !s.in_view) {
                        const SlotBinding& b = slots[s.slot];
                        resolved.push_back({PlanStep::Kind::Ground, "object", "", "", {b.instance}});
                        replace_all(text, "{" + s.slot + "}", b.phrase);
                        PendingTrace pt;
                        pt.step.text = "Find the " + b.phrase + "; it appears in {views:" + b.instance + "}.";
                        pt.instances = {b.instance};
                        trace.push_back(std::move(pt));
                    } else {
                        if (s.variants.empty()) {
                            failed = true;
                            break;
                        }
                        std::size_t vi = rng.below(s.variants.size());
                        const GroundVariant& variant = s.variants[vi];
                        auto members = pool_members(bundle, variant);
                        std::string phrase = variant.phrase.empty() ? variant.category : variant.phrase;
                        gr.tags = variant.tags;
                        gr.category = variant.category;
                        gr.pool = members;
                        slots[s.slot] = {"", phrase};
                        replace_all(text, "{" + s.slot + "}", phrase);
                        pool_resolved_idx = static_cast<int>(resolved.size());
                        resolved.push_back({PlanStep::Kind::Ground, "object", "", "", members});
                        PendingTrace pt;
                        pt.step.text = "Identify every " + phrase + " present in the scene.";
                        pt.instances = {"@pool"};
                        trace.push_back(std::move(pt));
                    }
                    break;
                }
                case PlanStep::Kind::Hop: {
                    if (s.frame == "camera") break;  // resolved after view choice
                    const std::string& from = slots[s.from_slot].instance;
                    if (from.empty()) {
                        failed = true;
                        break;
                    }
                    const rel::RelationGraph& graph = bundle.graphs.object_centric;

                    if (s.label == "?") {
                        const std::string& to = slots[s.to_slot].instance;
                        rel::Label found{};
                        bool any = false;
                        for (const auto& e : graph.edges)
                            if (e.subject == to && e.object == from && rel::is_horizontal(e.label)) {
                                found = e.label;
                                any = true;
                            }
                        if (!any) {
                            failed = true;
                            break;
                        }
                        gr.form = "relation_query";
                        gr.frame = "object";
                        gr.ref = from;
                        gr.target = to;
                        gr.labels = {rel::to_string(found)};
                        gr.chain = {from, to};
                        resolved.push_back({PlanStep::Kind::Hop, "object", "", from, {to}});
                        PendingTrace pt;
                        pt.step.text = "Judged from the " + slots[s.from_slot].phrase + "'s facing, the " +
                                       slots[s.to_slot].phrase + " is " + label_option(found) + ".";
                        pt.instances = {from, to};
                        trace.push_back(std::move(pt));
                        break;
                    }

                    std::vector<rel::Label> try_labels;
                    if (s.label == "*") {
                        try_labels = s.family == "contact" ? std::vector<rel::Label>{rel::Label::On}
                                                           : horizontal_labels();
                        rng.shuffle(try_labels);
                    } else {
                        auto l = rel::label_from_string(s.label);
                        if (!l) throw ParseError(tmpl.template_id + ": bad hop label '" + s.label + "'");
                        try_labels = {*l};
                    }

                    if (!s.slot.empty()) {
                        // Unique target reached by following one labeled edge.
                        bool bound = false;
                        std::map<std::string, int> name_count;
                        for (const auto& o : bundle.scene.objects)
                            ++name_count[bundle.lib->asset(o.asset_id).display_name];
                        for (auto l : try_labels) {
                            auto targets = hop_targets(graph, from, l);
                            std::vector<std::string> kept;
                            for (const auto& t : targets) {
                                if (!instance_matches_filter(bundle, t, s.filter_tags, s.filter_category))
                                    continue;
                                if (key_objects.count(t)) continue;
                                kept.push_back(t);
                            }
                            if (kept.size() != 1) continue;
                            const auto* obj = bundle.object_of(kept[0]);
                            const auto& rec = bundle.lib->asset(obj->asset_id);
                            if (name_count[rec.display_name] != 1) continue;
                            slots[s.slot] = {kept[0], rec.display_name};
                            key_objects.insert(kept[0]);
                            if (gr.chain.empty()) gr.chain.push_back(from);
                            gr.chain.push_back(kept[0]);
                            gr.labels.push_back(rel::to_string(l));
                            replace_all(text, "{" + s.slot + "}", rec.display_name);
                            std::string label_slot =
                                gr.labels.size() == 1 ? "{label}" : "{label" + std::to_string(gr.labels.size()) + "}";
                            replace_all(text, label_slot, label_inline(l));
                            if (gr.labels.size() == 1) replace_all(text, "{label1}", label_inline(l));
                            resolved.push_back({PlanStep::Kind::Hop, "object", "", from, {kept[0]}});
                            PendingTrace pt;
                            pt.step.text = "The object " + std::string(label_inline(l)) + " the " +
                                           slots[s.from_slot].phrase + " is the " + rec.display_name + ".";
                            pt.instances = {kept[0]};
                            trace.push_back(std::move(pt));
                            bound = true;
                            break;
                        }
                        if (!bound) failed = true;
                    } else {
                        // Relation-filtered counting pool.
                        if (try_labels.size() != 1) {
                            failed = true;
                            break;
                        }
                        rel::Label l = try_labels[0];
                        auto targets = hop_targets(graph, from, l);
                        std::vector<std::string> kept;
                        for (const auto& t : targets)
                            if (instance_matches_filter(bundle, t, s.filter_tags, s.filter_category))
                                kept.push_back(t);
                        std::sort(kept.begin(), kept.end());
                        gr.form = "count_where";
                        gr.ref = from;
                        gr.labels = {rel::to_string(l)};
                        gr.tags = s.filter_tags;
                        gr.category = s.filter_category;
                        gr.pool = kept;
                        replace_all(text, "{label}", label_inline(l));
                        pool_resolved_idx = static_cast<int>(resolved.size());
                        resolved.push_back({PlanStep::Kind::Hop, "object", "", from, kept});
                        PendingTrace pt;
                        pt.step.text = "Check each candidate's position against the " +
                                       slots[s.from_slot].phrase + "'s facing.";
                        pt.instances = {"@pool"};
                        trace.push_back(std::move(pt));
                    }
                    break;
                }
                case PlanStep::Kind::Aggregate: {
                    q.count_answer = static_cast<long long>(gr.pool.size());
                    resolved.push_back({PlanStep::Kind::Aggregate, "object", "", "", {}});
                    PendingTrace pt;
                    pt.step.text = "Counting the matches gives " + std::to_string(gr.pool.size()) + ".";
                    trace.push_back(std::move(pt));
                    break;
                }
                case PlanStep::Kind::Localize:
                    break;  // handled after the citation set is chosen
            }
        }
        if (failed) continue;
        if (tmpl.task == Task::MCQ && gr.labels.empty() && !cam_hop) continue;  // nothing resolved

        if (tmpl.task == Task::Counting) {
            if (gr.form.empty()) gr.form = "count_where";
            for (const auto& p : gr.pool) key_objects.insert(p);
            if (!gr.ref.empty()) key_objects.insert(gr.ref);
        }

        // In-view pools count objects whose projection falls in the frame of
        // the measurement view.
        if (pool_step && pool_step->in_view) {
            std::vector<std::string> kept;
            for (const auto& m : gr.pool)
                if (object_visible(bundle, pool_view, m)) kept.push_back(m);
            gr.pool = kept;
            gr.pool_in_view = true;
            gr.view_id = pool_view;
            q.count_answer = static_cast<long long>(kept.size());
            key_objects.clear();
            for (const auto& m : kept) key_objects.insert(m);
            if (pool_resolved_idx >= 0) resolved[pool_resolved_idx].to = kept;
            for (auto& pt : trace)
                if (pt.step.text.rfind("Counting the matches", 0) == 0)
                    pt.step.text = "Counting the matches framed by {view:" + pool_view + "} gives " +
                                   std::to_string(kept.size()) + ".";
        }

        auto views_choice =
            choose_views(bundle, tmpl.view_count, key_objects, required_views, policy.sparse_policy, rng);
        if (!views_choice) continue;
        q.view_ids = views_choice->cited;
        q.sparse = views_choice->sparse;

        // Camera-frame hop, evaluated on the measurement view.
        if (cam_hop) {
            const std::string& a = slots[cam_hop->from_slot].instance;
            const std::string& b = slots[cam_hop->to_slot].instance;
            const auto* graph = bundle.graphs.view_graph(cam_view);
            rel::Label found{};
            bool any = false;
            for (const auto& e : graph->edges) {
                if (e.subject != a || e.object != b) continue;
                bool side = e.label == rel::Label::CamLeft || e.label == rel::Label::CamRight;
                bool depth = e.label == rel::Label::CamCloser || e.label == rel::Label::CamFarther;
                if ((cam_hop->family == "cam-side" && side) || (cam_hop->family == "cam-depth" && depth)) {
                    found = e.label;
                    any = true;
                }
            }
            if (!any) continue;
            gr.form = cam_hop->family == "cam-depth" && tmpl.options_denote == "objects" ? "pair_order"
                                                                                         : "relation_query";
            gr.frame = "camera";
            gr.ref = b;
            gr.target = a;
            gr.chain = {a, b};
            gr.labels = {rel::to_string(found)};
            gr.view_id = cam_view;
            resolved.push_back({PlanStep::Kind::Hop, "camera", cam_view, a, {b}});
            PendingTrace pt;
            pt.step.text = "In " + view_name(q.view_ids, cam_view) + ", the " + slots[cam_hop->from_slot].phrase +
                           " is " + label_inline(found) + " the " + slots[cam_hop->to_slot].phrase + ".";
            pt.instances = {a, b};
            trace.push_back(std::move(pt));
            replace_all(text, "{view}", view_name(q.view_ids, cam_view));
        }
        if (pool_step && pool_step->in_view)
            replace_all(text, "{view}", view_name(q.view_ids, pool_view));

        if (tmpl.task == Task::Detection) {
            const PlanStep& loc = tmpl.plan.back();
            const std::string& target = slots[loc.from_slot].instance;
            if (target.empty()) continue;
            std::string best_view;
            double best_occ = 2.0;
            for (const auto& v : q.view_ids) {
                const auto* m = bundle.views.find(v, target);
                if (!m || !m->in_frustum || !m->bbox2 || m->bbox2->area() <= 0.0) continue;
                if (m->occlusion_ratio < best_occ || (m->occlusion_ratio == best_occ && v < best_view)) {
                    best_occ = m->occlusion_ratio;
                    best_view = v;
                }
            }
            if (best_view.empty()) continue;
            const auto* m = bundle.views.find(best_view, target);
            q.gt_boxes = {{best_view, *m->bbox2}};
            gr.form = "locate";
            gr.target = target;
            gr.view_id = best_view;
            if (gr.chain.empty()) gr.chain = {target};
            resolved.push_back({PlanStep::Kind::Localize, "object", best_view, target, {}});
            PendingTrace pt;
            pt.step.text = "The " + slots[loc.from_slot].phrase + " is visible in " +
                           view_name(q.view_ids, best_view) + " at the marked region.";
            pt.step.evidence = {{best_view, target, *m->bbox2}};
            trace.push_back(std::move(pt));
            replace_all(text, "{dview}", view_name(q.view_ids, best_view));
        }

        if (gr.form.empty()) continue;  // template shape did not produce a verifiable question
        if (gr.form == "count_where" && gr.chain.empty()) gr.chain.assign(gr.pool.begin(), gr.pool.end());

        // Options and answers.
        if (tmpl.task == Task::MCQ) {
            struct Opt {
                std::string text;
                OptionDenotation den;
                bool correct;
            };
            std::vector<Opt> opts;
            if (tmpl.options_denote == "labels") {
                auto gt = rel::label_from_string(gr.labels.back());
                opts.push_back({label_option(*gt), {"label", gr.labels.back()}, true});
                std::vector<rel::Label> family;
                if (gr.frame == "object")
                    family = horizontal_labels();
                else if (cam_hop && cam_hop->family == "cam-side")
                    family = {rel::Label::CamLeft, rel::Label::CamRight};
                else
                    family = {rel::Label::CamCloser, rel::Label::CamFarther};
                rng.shuffle(family);
                const auto* ref_g = bundle.geom_of(gr.ref);
                const auto* target_g = bundle.geom_of(gr.target);
                for (auto l : family) {
                    if (static_cast<int>(opts.size()) >= tmpl.option_count) break;
                    if (l == *gt) continue;
                    // Distractors must be provably false against the scene.
                    if (gr.frame == "object" &&
                        rel::object_centric_relation(*ref_g, *target_g) == l)
                        continue;
                    opts.push_back({label_option(l), {"label", rel::to_string(l)}, false});
                }
            } else if (gr.form == "pair_order") {
                auto stored = rel::label_from_string(gr.labels.back());
                if (*stored == rel::Label::CamFarther) std::swap(gr.ref, gr.target);
                gr.labels = {rel::to_string(rel::Label::CamCloser)};
                const auto* closer = bundle.object_of(gr.target);
                const auto* farther = bundle.object_of(gr.ref);
                opts.push_back(
                    {"the " + bundle.lib->asset(closer->asset_id).display_name, {"object", gr.target}, true});
                opts.push_back(
                    {"the " + bundle.lib->asset(farther->asset_id).display_name, {"object", gr.ref}, false});
            } else {
                gr.form = "object_query";
                const std::string& gt_instance = gr.chain.back();
                const std::string& relation_ref = gr.chain[gr.chain.size() - 2];
                const auto* gt_obj = bundle.object_of(gt_instance);
                opts.push_back(
                    {"the " + bundle.lib->asset(gt_obj->asset_id).display_name, {"object", gt_instance}, true});
                std::map<std::string, int> name_count;
                for (const auto& o : bundle.scene.objects)
                    ++name_count[bundle.lib->asset(o.asset_id).display_name];
                std::vector<std::string> cands;
                for (const auto& o : bundle.scene.objects) {
                    if (std::find(gr.chain.begin(), gr.chain.end(), o.instance_id) != gr.chain.end()) continue;
                    if (name_count[bundle.lib->asset(o.asset_id).display_name] != 1) continue;
                    bool visible = false;
                    for (const auto& v : q.view_ids)
                        if (object_visible(bundle, v, o.instance_id)) visible = true;
                    if (!visible) continue;
                    auto want = rel::label_from_string(gr.labels.back());
                    const auto* ref_g = bundle.geom_of(relation_ref);
                    const auto* cand_g = bundle.geom_of(o.instance_id);
                    bool is_true;
                    if (*want == rel::Label::On)
                        is_true = rel::contact_relation(*cand_g, *ref_g) == rel::Label::On;
                    else
                        is_true =
                            ref_g->has_front && rel::object_centric_relation(*ref_g, *cand_g) == *want;
                    if (is_true) continue;
                    cands.push_back(o.instance_id);
                }
                rng.shuffle(cands);
                for (const auto& c : cands) {
                    if (static_cast<int>(opts.size()) >= tmpl.option_count) break;
                    const auto* o = bundle.object_of(c);
                    opts.push_back({"the " + bundle.lib->asset(o->asset_id).display_name, {"object", c}, false});
                }
            }
            if (static_cast<int>(opts.size()) < std::min(tmpl.option_count, 2)) continue;

            rng.shuffle(opts);
            for (std::size_t i = 0; i < opts.size(); ++i) {
                q.options.push_back(opts[i].text);
                q.option_denotations.push_back(opts[i].den);
                if (opts[i].correct) q.answer_index = static_cast<int>(i);
            }
            q.final_answer_text = q.options[q.answer_index];
        } else if (tmpl.task == Task::Counting) {
            q.final_answer_text = std::to_string(q.count_answer);
        } else {
            JsonWriter w;
            w.begin_array();
            for (const auto& [v, b] : q.gt_boxes) {
                w.begin_object();
                w.kv("view_id", v);
                w.key("box");
                w.begin_array().value(b.x_min).value(b.y_min).value(b.x_max).value(b.y_max).end_array();
                w.end_object();
            }
            w.end_array();
            q.final_answer_text = w.str();
        }

        q.key_objects.assign(key_objects.begin(), key_objects.end());
        std::sort(q.key_objects.begin(), q.key_objects.end());
        q.visibility_difficulty =
            q.key_objects.empty()
                ? 0.0
                : render::key_object_visibility(q.key_objects, bundle.views.metadata, q.view_ids);

        try {
            q.reasoning_difficulty =
                reasoning_difficulty(resolved, bundle.graphs, key_objects, policy.difficulty_log_coeff);
        } catch (const std::exception&) {
            continue;  // hop endpoints unreachable: template inapplicable here
        }

        // Finalize trace: placeholders, then deferred evidence.
        for (auto& pt : trace) {
            std::size_t pos;
            while ((pos = pt.step.text.find("{views:")) != std::string::npos) {
                std::size_t end = pt.step.text.find('}', pos);
                std::string inst = pt.step.text.substr(pos + 7, end - pos - 7);
                pt.step.text.replace(pos, end - pos + 1, join_views(bundle, q.view_ids, inst));
            }
            while ((pos = pt.step.text.find("{view:")) != std::string::npos) {
                std::size_t end = pt.step.text.find('}', pos);
                std::string v = pt.step.text.substr(pos + 6, end - pos - 6);
                pt.step.text.replace(pos, end - pos + 1, view_name(q.view_ids, v));
            }
            for (const auto& inst : pt.instances) {
                if (inst == "@pool") {
                    for (const auto& m : gr.pool) {
                        auto ev = all_evidence(bundle, q.view_ids, m);
                        pt.step.evidence.insert(pt.step.evidence.end(), ev.begin(), ev.end());
                    }
                } else {
                    auto ev = all_evidence(bundle, q.view_ids, inst);
                    pt.step.evidence.insert(pt.step.evidence.end(), ev.begin(), ev.end());
                }
            }
            q.full_trace.push_back(pt.step);
        }
        // Cross-view identity statements, used from level 3 upward.
        for (const auto& inst : q.key_objects) {
            std::vector<int> seen;
            for (std::size_t i = 0; i < q.view_ids.size(); ++i)
                if (object_visible(bundle, q.view_ids[i], inst)) seen.push_back(static_cast<int>(i) + 1);
            if (seen.size() < 2) continue;
            const auto* o = bundle.object_of(inst);
            TraceStep ts;
            ts.cross_view = true;
            ts.text = "The " + bundle.lib->asset(o->asset_id).display_name + " in view " +
                      std::to_string(seen[0]) + " is the same instance as in view " + std::to_string(seen[1]) +
                      ".";
            ts.evidence = all_evidence(bundle, q.view_ids, inst);
            q.full_trace.push_back(std::move(ts));
        }

        q.text = text;
        out.push_back(std::move(q));
        ++emitted;
    }
    return out;
}


std::optional<QuestionInstance> instantiate_question(const QuestionTemplate& tmpl, const SceneBundle& bundle,
                                                     std::uint64_t seed, const GenPolicy& policy) {
    GenPolicy one = policy;
    one.max_bindings_per_scene_template = 1;
    auto all = enumerate_candidates(tmpl, bundle, seed, one);
    if (all.empty()) return std::nullopt;
    return all.front();
}

SupervisionTrace emit_supervision(const QuestionInstance& q, int level) {
    if (level < 1 || level > 4) throw std::invalid_argument("supervision level must be in 1..4");
    SupervisionTrace t;
    t.level = level;
    t.final_answer = q.final_answer_text;
    if (level == 1) return t;
    for (const auto& step : q.full_trace) {
        if (step.cross_view && level < 3) continue;
        TraceStep out = step;
        if (level < 4) out.evidence.clear();
        t.steps.push_back(std::move(out));
    }
    return t;
}

GenTargets GenTargets::load(const std::string& path) {
    nlohmann::json j = parse_json_file(path);
    GenTargets t;
    const auto& counts = require_field(j, "counts", path);
    t.mcq = counts.value("mcq", 0LL);
    t.counting = counts.value("counting", 0LL);
    t.detection = counts.value("detection", 0LL);
    if (t.mcq < 0 || t.counting < 0 || t.detection < 0) throw ParseError(path + ": negative target count");
    t.supervision_level = static_cast<int>(j.value("supervision_level", 0));
    if (t.supervision_level < 0 || t.supervision_level > 4)
        throw ParseError(path + ": supervision_level must be 0..4");
    t.policy.sparse_policy = j.value("sparse_policy", std::string("prefer"));
    if (t.policy.sparse_policy != "prefer" && t.policy.sparse_policy != "require" &&
        t.policy.sparse_policy != "off")
        throw ParseError(path + ": sparse_policy must be prefer|require|off");
    t.policy.difficulty_log_coeff = j.value("difficulty_log_coeff", 1.0);
    t.policy.max_bindings_per_scene_template =
        static_cast<int>(j.value("max_bindings_per_scene_template", 6));
    if (j.contains("balance")) {
        t.mcq_tolerance_pp = j["balance"].value("mcq_tolerance_pp", 5.0);
        t.counting_max_mass = j["balance"].value("counting_max_mass", 0.40);
    }
    return t;
}

namespace {

// Balanced correct-option positions: per option-count group, positions are
// dealt from seed-shuffled decks of full permutations, so frequencies stay
// within one deal of uniform while remaining seed-random.
void balance_mcq_positions(std::vector<QuestionInstance*>& mcqs, std::uint64_t seed) {
    std::map<int, std::vector<QuestionInstance*>> by_count;
    for (auto* q : mcqs) by_count[static_cast<int>(q->options.size())].push_back(q);
    for (auto& [k, group] : by_count) {
        Rng rng(derive_seed(seed, {"balance", std::to_string(k)}));
        std::vector<int> deck;
        for (auto* q : group) {
            if (deck.empty()) {
                for (int i = 0; i < k; ++i) deck.push_back(i);
                rng.shuffle(deck);
            }
            int want = deck.back();
            deck.pop_back();

            // Re-seat the correct option at `want`, distractors shuffled into
            // the remaining slots.
            std::vector<std::string> texts = q->options;
            std::vector<OptionDenotation> dens = q->option_denotations;
            std::string gt_text = texts[q->answer_index];
            OptionDenotation gt_den = dens[q->answer_index];
            texts.erase(texts.begin() + q->answer_index);
            dens.erase(dens.begin() + q->answer_index);
            std::vector<std::size_t> order(texts.size());
            for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
            rng.shuffle(order);

            q->options.assign(k, "");
            q->option_denotations.assign(k, {});
            q->options[want] = gt_text;
            q->option_denotations[want] = gt_den;
            std::size_t src = 0;
            for (int slot = 0; slot < k; ++slot) {
                if (slot == want) continue;
                q->options[slot] = texts[order[src]];
                q->option_denotations[slot] = dens[order[src]];
                ++src;
            }
            q->answer_index = want;
        }
    }
}

}  // namespace

Dataset generate_dataset(const std::vector<SceneBundle>& bundles,
                         const std::vector<QuestionTemplate>& templates, const GenTargets& targets,
                         std::uint64_t seed, int jobs) {
    // Scenes and templates sorted for order-independence of the input.
    std::vector<const SceneBundle*> scenes;
    for (const auto& b : bundles) scenes.push_back(&b);
    std::sort(scenes.begin(), scenes.end(),
              [](const auto* a, const auto* b) { return a->scene.scene_id < b->scene.scene_id; });
    std::vector<const QuestionTemplate*> tmpls;
    for (const auto& t : templates) tmpls.push_back(&t);
    std::sort(tmpls.begin(), tmpls.end(),
              [](const auto* a, const auto* b) { return a->template_id < b->template_id; });

    // Candidate generation is embarrassingly parallel per scene; results are
    // stitched back in scene order.
    std::vector<std::vector<QuestionInstance>> per_scene(scenes.size());
    parallel_for(scenes.size(), jobs, [&](std::size_t si) {
        std::vector<QuestionInstance> local;
        for (const auto* tmpl : tmpls) {
            auto cands = enumerate_candidates(*tmpl, *scenes[si], seed, targets.policy);
            for (auto& c : cands) local.push_back(std::move(c));
        }
        per_scene[si] = std::move(local);
    });

    std::vector<QuestionInstance> all;
    for (auto& v : per_scene)
        for (auto& q : v) all.push_back(std::move(q));

    // Selection, deterministically shuffled per task.
    std::map<Task, std::vector<std::size_t>> by_task;
    for (std::size_t i = 0; i < all.size(); ++i) by_task[all[i].task].push_back(i);

    std::vector<QuestionInstance> accepted;
    std::ostringstream shortfall;
    auto target_for = [&](Task t) {
        switch (t) {
            case Task::MCQ: return targets.mcq;
            case Task::Counting: return targets.counting;
            default: return targets.detection;
        }
    };

    for (Task task : {Task::MCQ, Task::Counting, Task::Detection}) {
        long long want = target_for(task);
        auto& pool = by_task[task];
        Rng rng(derive_seed(seed, {"select", to_string(task)}));
        rng.shuffle(pool);
        long long taken = 0;
        std::map<long long, long long> count_mass;
        for (std::size_t idx : pool) {
            if (taken >= want) break;
            if (task == Task::Counting) {
                long long v = all[idx].count_answer;
                long long cap = std::max<long long>(
                    1, static_cast<long long>(std::floor(targets.counting_max_mass * (taken + 1))));
                if (count_mass[v] + 1 > cap) continue;
                ++count_mass[v];
            }
            accepted.push_back(all[idx]);
            ++taken;
        }
        if (taken < want) {
            std::map<std::string, long long> per_template;
            for (std::size_t idx : pool) ++per_template[all[idx].template_id];
            shortfall << to_string(task) << ": wanted " << want << ", produced " << taken
                      << " (candidate pool " << pool.size() << ")\n";
            for (const auto& [tid, n] : per_template)
                shortfall << "  template " << tid << ": " << n << " candidates\n";
        }
    }

    // MCQ position balancing.
    std::vector<QuestionInstance*> mcqs;
    for (auto& q : accepted)
        if (q.task == Task::MCQ) mcqs.push_back(&q);
    balance_mcq_positions(mcqs, seed);

    // Stable qids: sort by (task, scene, template, text) and number.
    std::sort(accepted.begin(), accepted.end(), [](const auto& a, const auto& b) {
        return std::tie(a.task, a.scene_id, a.template_id, a.text, a.final_answer_text) <
               std::tie(b.task, b.scene_id, b.template_id, b.text, b.final_answer_text);
    });
    Dataset out;
    for (std::size_t i = 0; i < accepted.size(); ++i) {
        char buf[16];
        std::snprintf(buf, sizeof(buf), "q%06zu", i);
        accepted[i].qid = buf;
        if (targets.supervision_level > 0)
            accepted[i].supervision = emit_supervision(accepted[i], targets.supervision_level);
        out.questions.push_back(std::move(accepted[i]));
    }
    out.shortfall_report = shortfall.str();
    return out;
}

namespace {

void write_bbox(JsonWriter& w, const geom::Bbox2& b) {
    w.begin_array().value(b.x_min).value(b.y_min).value(b.x_max).value(b.y_max).end_array();
}

void write_supervision(JsonWriter& w, const SupervisionTrace& t) {
    w.begin_object();
    w.kv("level", t.level);
    w.key("steps");
    w.begin_array();
    for (const auto& s : t.steps) {
        w.begin_object();
        w.kv("text", s.text);
        w.kv("cross_view", s.cross_view);
        w.key("evidence");
        w.begin_array();
        for (const auto& e : s.evidence) {
            w.begin_object();
            w.kv("view_id", e.view_id);
            w.kv("instance_id", e.instance_id);
            w.key("bbox");
            write_bbox(w, e.bbox);
            w.end_object();
        }
        w.end_array();
        w.end_object();
    }
    w.end_array();
    w.kv("final_answer", t.final_answer);
    w.end_object();
}

}  // namespace

std::string QuestionInstance::to_jsonl() const {
    JsonWriter w;
    w.begin_object();
    w.kv("qid", qid);
    w.kv("scene_id", scene_id);
    w.kv("template_id", template_id);
    w.key("images");
    w.begin_array();
    for (const auto& v : view_ids) w.value(scene_id + "/" + v + ".ppm");
    w.end_array();
    w.kv("task", qa::to_string(task));
    w.kv("text", text);
    if (task == Task::MCQ) {
        w.key("options");
        w.begin_array();
        for (const auto& o : options) w.value(o);
        w.end_array();
        w.kv("answer", static_cast<std::int64_t>(answer_index));
    } else if (task == Task::Counting) {
        w.kv("answer", static_cast<std::int64_t>(count_answer));
    } else {
        w.key("answer");
        w.begin_array();
        for (const auto& [v, b] : gt_boxes) {
            w.begin_object();
            w.kv("view_id", v);
            w.key("box");
            write_bbox(w, b);
            w.end_object();
        }
        w.end_array();
    }
    w.kv("reasoning_difficulty", reasoning_difficulty);
    w.kv("visibility_difficulty", visibility_difficulty);
    w.key("key_objects");
    w.begin_array();
    for (const auto& k : key_objects) w.value(k);
    w.end_array();
    w.kv("sparse", sparse);
    w.key("image_size");
    w.begin_array().value(image_width).value(image_height).end_array();

    w.key("grounding");
    w.begin_object();
    w.kv("form", grounding.form);
    w.kv("frame", grounding.frame);
    w.kv("ref", grounding.ref);
    w.kv("target", grounding.target);
    w.key("chain");
    w.begin_array();
    for (const auto& c : grounding.chain) w.value(c);
    w.end_array();
    w.key("labels");
    w.begin_array();
    for (const auto& l : grounding.labels) w.value(l);
    w.end_array();
    w.kv("view_id", grounding.view_id);
    w.key("tags");
    w.begin_array();
    for (const auto& t : grounding.tags) w.value(t);
    w.end_array();
    w.kv("category", grounding.category);
    w.kv("pool_in_view", grounding.pool_in_view);
    w.key("pool");
    w.begin_array();
    for (const auto& p : grounding.pool) w.value(p);
    w.end_array();
    if (task == Task::MCQ) {
        w.key("option_denotations");
        w.begin_array();
        for (const auto& d : option_denotations) {
            w.begin_object();
            w.kv("kind", d.kind);
            w.kv("value", d.value);
            w.end_object();
        }
        w.end_array();
    }
    w.end_object();

    if (supervision) {
        w.key("supervision");
        write_supervision(w, *supervision);
    }
    w.end_object();
    return w.str();
}

std::string Dataset::to_jsonl() const {
    std::string out;
    for (const auto& q : questions) {
        out += q.to_jsonl();
        out += '\n';
    }
    return out;
}

QuestionInstance question_from_jsonl(const std::string& line, const std::string& context) {
    nlohmann::json j = parse_json_text(line, context);
    QuestionInstance q;
    q.qid = require_string(j, "qid", context);
    q.scene_id = require_string(j, "scene_id", context);
    q.template_id = j.value("template_id", std::string());
    for (const auto& im : j.value("images", nlohmann::json::array())) {
        std::string path = im.get<std::string>();
        auto slash = path.find_last_of('/');
        auto dot = path.find_last_of('.');
        q.view_ids.push_back(path.substr(slash + 1, dot - slash - 1));
    }
    auto task = task_from_string(require_string(j, "task", context));
    if (!task) throw ParseError(context + ": unknown task");
    q.task = *task;
    q.text = require_string(j, "text", context);
    if (q.task == Task::MCQ) {
        for (const auto& o : require_field(j, "options", context)) q.options.push_back(o.get<std::string>());
        q.answer_index = static_cast<int>(require_int(j, "answer", context));
        if (q.answer_index < 0 || q.answer_index >= static_cast<int>(q.options.size()))
            throw ParseError(context + ": answer index out of range");
    } else if (q.task == Task::Counting) {
        q.count_answer = require_int(j, "answer", context);
    } else {
        for (const auto& jb : require_field(j, "answer", context)) {
            const auto& box = require_field(jb, "box", context);
            q.gt_boxes.push_back({require_string(jb, "view_id", context),
                                  {box[0].get<double>(), box[1].get<double>(), box[2].get<double>(),
                                   box[3].get<double>()}});
        }
    }
    q.reasoning_difficulty = require_number(j, "reasoning_difficulty", context);
    q.visibility_difficulty = require_number(j, "visibility_difficulty", context);
    for (const auto& k : j.value("key_objects", nlohmann::json::array()))
        q.key_objects.push_back(k.get<std::string>());
    q.sparse = j.value("sparse", false);
    if (j.contains("image_size")) {
        q.image_width = j["image_size"][0].get<int>();
        q.image_height = j["image_size"][1].get<int>();
    }
    if (j.contains("grounding")) {
        const auto& jg = j["grounding"];
        q.grounding.form = jg.value("form", std::string());
        q.grounding.frame = jg.value("frame", std::string("object"));
        q.grounding.ref = jg.value("ref", std::string());
        q.grounding.target = jg.value("target", std::string());
        for (const auto& c : jg.value("chain", nlohmann::json::array()))
            q.grounding.chain.push_back(c.get<std::string>());
        for (const auto& l : jg.value("labels", nlohmann::json::array()))
            q.grounding.labels.push_back(l.get<std::string>());
        q.grounding.view_id = jg.value("view_id", std::string());
        for (const auto& t : jg.value("tags", nlohmann::json::array()))
            q.grounding.tags.push_back(t.get<std::string>());
        q.grounding.category = jg.value("category", std::string());
        q.grounding.pool_in_view = jg.value("pool_in_view", false);
        for (const auto& p : jg.value("pool", nlohmann::json::array()))
            q.grounding.pool.push_back(p.get<std::string>());
        for (const auto& d : jg.value("option_denotations", nlohmann::json::array()))
            q.option_denotations.push_back({d.value("kind", std::string()), d.value("value", std::string())});
    }
    if (j.contains("supervision")) {
        const auto& js = j["supervision"];
        SupervisionTrace t;
        t.level = static_cast<int>(js.value("level", 1));
        t.final_answer = js.value("final_answer", std::string());
        for (const auto& s : js.value("steps", nlohmann::json::array())) {
            TraceStep ts;
            ts.text = s.value("text", std::string());
            ts.cross_view = s.value("cross_view", false);
            for (const auto& e : s.value("evidence", nlohmann::json::array())) {
                const auto& bb = e["bbox"];
                ts.evidence.push_back({e.value("view_id", std::string()), e.value("instance_id", std::string()),
                                       {bb[0].get<double>(), bb[1].get<double>(), bb[2].get<double>(),
                                        bb[3].get<double>()}});
            }
            t.steps.push_back(std::move(ts));
        }
        q.supervision = std::move(t);
    }
    return q;
}

Dataset load_dataset(const std::string& path) {
    Dataset d;
    std::istringstream in(read_text_file(path));
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        d.questions.push_back(question_from_jsonl(line, path + ":" + std::to_string(lineno)));
    }
    return d;
}

}  // namespace mvqa::qa
