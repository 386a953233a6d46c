// Independent answer verification: every claim is re-derived from the raw
// scene geometry through the geometry/relations modules directly, never
// through the generation paths in qagen.cpp.

#include <algorithm>
#include <set>

#include "mvqa/qagen.hpp"

namespace mvqa::qa {

namespace {

bool fail(std::string* reason, const std::string& why) {
    if (reason) *reason = why;
    return false;
}

// Geometric in-frame test, recomputed from the camera parameters.
bool recompute_in_frame(const SceneBundle& bundle, const std::string& view_id,
                        const scene::ObjectGeom& obj) {
    const geom::CameraModel* cam = nullptr;
    for (const auto& v : bundle.views.views)
        if (v.view_id == view_id) cam = &v.camera;
    if (!cam) return false;
    std::optional<geom::ProjectedBox> pb;
    if (obj.mesh)
        pb = geom::project_mesh_to_bbox2(*cam, *obj.mesh, obj.pose, obj.scale);
    else
        pb = geom::project_box_to_bbox2(*cam, obj.box);
    return pb.has_value() && pb->bbox.area() > 0.0;
}

// Camera-frame relation between two objects, recomputed from projection.
bool holds_camera_relation(const SceneBundle& bundle, const std::string& view_id, rel::Label want,
                           const scene::ObjectGeom& subject, const scene::ObjectGeom& object) {
    const geom::CameraModel* cam = nullptr;
    for (const auto& v : bundle.views.views)
        if (v.view_id == view_id) cam = &v.camera;
    if (!cam) return false;
    std::vector<rel::Edge> edges;
    try {
        edges = rel::camera_centric_relations(*cam, subject, object);
    } catch (const std::exception&) {
        return false;
    }
    for (const auto& e : edges)
        if (e.subject == subject.instance_id && e.object == object.instance_id && e.label == want) return true;
    return false;
}

// Object-frame relation (horizontal or contact) between target and ref.
bool holds_object_relation(rel::Label want, const scene::ObjectGeom& ref, const scene::ObjectGeom& target) {
    if (want == rel::Label::On) return rel::contact_relation(target, ref) == rel::Label::On;
    if (want == rel::Label::Under) return rel::contact_relation(target, ref) == rel::Label::Under;
    if (!ref.has_front) return false;
    return rel::object_centric_relation(ref, target) == want;
}

bool option_is_true(const SceneBundle& bundle, const QuestionInstance& q, const OptionDenotation& den,
                    std::string* reason) {
    const Grounding& gr = q.grounding;
    if (den.kind == "label") {
        auto label = rel::label_from_string(den.value);
        if (!label) return fail(reason, "unknown label denotation '" + den.value + "'");
        const auto* ref = bundle.geom_of(gr.ref);
        const auto* target = bundle.geom_of(gr.target);
        if (!ref || !target) return fail(reason, "grounding references unknown instances");
        if (gr.frame == "camera") return holds_camera_relation(bundle, gr.view_id, *label, *target, *ref);
        return holds_object_relation(*label, *ref, *target);
    }
    if (den.kind == "object") {
        if (gr.form == "pair_order") {
            // True iff this instance is the closer of the pair in the view.
            const auto* a = bundle.geom_of(den.value);
            std::string other_id = den.value == gr.target ? gr.ref : gr.target;
            const auto* b = bundle.geom_of(other_id);
            if (!a || !b) return fail(reason, "pair_order instance missing");
            return holds_camera_relation(bundle, gr.view_id, rel::Label::CamCloser, *a, *b);
        }
        // object_query: true iff the instance satisfies the final hop
        // relation from the previous chain element.
        if (gr.chain.size() < 2 || gr.labels.empty()) return fail(reason, "object_query grounding incomplete");
        auto want = rel::label_from_string(gr.labels.back());
        const auto* ref = bundle.geom_of(gr.chain[gr.chain.size() - 2]);
        const auto* cand = bundle.geom_of(den.value);
        if (!want || !ref || !cand) return fail(reason, "object_query references unknown instances");
        return holds_object_relation(*want, *ref, *cand);
    }
    return fail(reason, "unknown option denotation kind '" + den.kind + "'");
}

bool verify_mcq(const QuestionInstance& q, const SceneBundle& bundle, std::string* reason) {
    if (q.answer_index < 0 || q.answer_index >= static_cast<int>(q.options.size()))
        return fail(reason, "answer index out of range");
    if (q.option_denotations.size() != q.options.size())
        return fail(reason, "option denotations missing");

    // For multi-hop chains every intermediate edge must also re-derive.
    const Grounding& gr = q.grounding;
    if (gr.form == "object_query") {
        for (std::size_t i = 0; i + 1 < gr.chain.size(); ++i) {
            auto want = rel::label_from_string(gr.labels[i]);
            const auto* ref = bundle.geom_of(gr.chain[i]);
            const auto* target = bundle.geom_of(gr.chain[i + 1]);
            if (!want || !ref || !target) return fail(reason, "chain references unknown instances");
            if (!holds_object_relation(*want, *ref, *target))
                return fail(reason, "chain hop " + std::to_string(i) + " does not re-derive");
        }
    }

    for (std::size_t i = 0; i < q.options.size(); ++i) {
        std::string why;
        bool truth = option_is_true(bundle, q, q.option_denotations[i], &why);
        if (!why.empty()) return fail(reason, why);
        if (static_cast<int>(i) == q.answer_index && !truth)
            return fail(reason, "marked answer '" + q.options[i] + "' is not supported by the geometry");
        if (static_cast<int>(i) != q.answer_index && truth)
            return fail(reason, "distractor '" + q.options[i] + "' is actually true");
    }
    return true;
}

bool verify_counting(const QuestionInstance& q, const SceneBundle& bundle, std::string* reason) {
    const Grounding& gr = q.grounding;
    // Re-derive the pool from the asset library and geometry.
    std::set<std::string> tagset(gr.tags.begin(), gr.tags.end());
    std::set<std::string> matching_assets;
    auto ids = assets::query_assets_by_tags(
        *bundle.lib, tagset, gr.category.empty() ? std::nullopt : std::optional<std::string>(gr.category));
    matching_assets.insert(ids.begin(), ids.end());

    std::vector<std::string> pool;
    for (const auto& o : bundle.scene.objects) {
        if (!matching_assets.count(o.asset_id)) continue;
        const auto* g = bundle.geom_of(o.instance_id);
        if (!gr.labels.empty()) {
            auto want = rel::label_from_string(gr.labels.front());
            const auto* ref = bundle.geom_of(gr.ref);
            if (!want || !ref) return fail(reason, "counting grounding incomplete");
            if (!holds_object_relation(*want, *ref, *g)) continue;
        }
        if (gr.pool_in_view && !recompute_in_frame(bundle, gr.view_id, *g)) continue;
        pool.push_back(o.instance_id);
    }
    std::sort(pool.begin(), pool.end());
    std::vector<std::string> stated = gr.pool;
    std::sort(stated.begin(), stated.end());
    if (pool != stated) return fail(reason, "recomputed pool differs from the stated one");
    if (static_cast<long long>(pool.size()) != q.count_answer)
        return fail(reason, "recomputed count " + std::to_string(pool.size()) + " != answer " +
                                std::to_string(q.count_answer));
    return true;
}

bool verify_detection(const QuestionInstance& q, const SceneBundle& bundle, std::string* reason) {
    if (q.gt_boxes.empty()) return fail(reason, "detection question without gt boxes");
    const Grounding& gr = q.grounding;
    const auto* target = bundle.geom_of(gr.target);
    if (!target) return fail(reason, "detection target missing from scene");

    // Multi-hop detection chains must re-derive too.
    for (std::size_t i = 0; i + 1 < gr.chain.size(); ++i) {
        auto want = rel::label_from_string(gr.labels.size() > i ? gr.labels[i] : "");
        const auto* ref = bundle.geom_of(gr.chain[i]);
        const auto* tgt = bundle.geom_of(gr.chain[i + 1]);
        if (!want || !ref || !tgt) return fail(reason, "detection chain incomplete");
        if (!holds_object_relation(*want, *ref, *tgt))
            return fail(reason, "detection chain hop does not re-derive");
    }

    for (const auto& [view_id, box] : q.gt_boxes) {
        if (!(box.area() > 0.0)) return fail(reason, "gt box has no area");
        const geom::CameraModel* cam = nullptr;
        for (const auto& v : bundle.views.views)
            if (v.view_id == view_id) cam = &v.camera;
        if (!cam) return fail(reason, "gt box cites unknown view '" + view_id + "'");
        if (box.x_min < -1e-9 || box.y_min < -1e-9 || box.x_max > cam->width + 1e-9 ||
            box.y_max > cam->height + 1e-9)
            return fail(reason, "gt box is not clipped to the image");
        std::optional<geom::ProjectedBox> pb;
        if (target->mesh)
            pb = geom::project_mesh_to_bbox2(*cam, *target->mesh, target->pose, target->scale);
        else
            pb = geom::project_box_to_bbox2(*cam, target->box);
        if (!pb) return fail(reason, "target does not project into the cited view");
        if (geom::iou(box, pb->bbox) < 0.9)
            return fail(reason, "gt box disagrees with the re-projected extent (IoU < 0.9)");
    }
    return true;
}

}  // namespace

bool verify_answer(const QuestionInstance& q, const SceneBundle& bundle, std::string* reason) {
    try {
        switch (q.task) {
            case Task::MCQ: return verify_mcq(q, bundle, reason);
            case Task::Counting: return verify_counting(q, bundle, reason);
            case Task::Detection: return verify_detection(q, bundle, reason);
        }
    } catch (const std::exception& e) {
        return fail(reason, std::string("verification raised: ") + e.what());
    }
    return fail(reason, "unknown task");
}

}  // namespace mvqa::qa
