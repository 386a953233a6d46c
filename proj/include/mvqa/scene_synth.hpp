#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mvqa/relations.hpp"
#include "mvqa/scene.hpp"

namespace mvqa::scene {

struct SynthParams {
    int max_attempts_per_object = 1000;
    double overlap_tolerance = 1e-4;  // m^2 (1 cm^2)
    rel::RelationParams relation_params;
};

class ConstraintUnsatisfiable : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Deterministic layout sampling: identical (theme, lib, seed) produce an
// identical scene. Per-attempt randomness derives from (seed, theme_id,
// spec index, attempt counter), so later specs never reshuffle earlier ones.
SceneInstance sample_scene(const ThemeConfig& theme, const assets::AssetLibrary& lib, std::uint64_t seed,
                           const std::string& scene_id, const SynthParams& params = {});

// True iff the object-centric relation of `b` in `a`'s frame matches the
// anchor label (contact for "on") and the horizontal center distance falls
// inside the band. Distance-only anchors check the band alone.
bool anchor_relation_satisfied(const ObjectGeom& a, const ObjectGeom& b, const AnchorSpec& rel,
                               const rel::RelationParams& params = {});

struct SceneViolation {
    enum class Kind { OutOfFloor, Collision, AnchorViolation, UnknownAsset, DuplicateInstance };
    Kind kind;
    std::string subject;
    std::string detail;
};

// Independent post-hoc checker; sample_scene output must always come back
// clean.
std::vector<SceneViolation> validate_scene(const SceneInstance& scene, const assets::AssetLibrary& lib,
                                           const ThemeConfig& theme, const SynthParams& params = {});

}  // namespace mvqa::scene
