#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "mvqa/geometry.hpp"

namespace mvqa::assets {

struct TagEntry {
    std::string id;    // globally unique slug, e.g. "chair.back.high"
    int level = 1;     // 1 = coarsest
    std::string text;  // human-readable description
};

struct CategoryEntry {
    std::string name;
    std::vector<std::string> comparison_keys;
    std::vector<TagEntry> tags;
};

struct ShapeRef {
    enum class Kind { Box, Mesh };
    Kind kind = Kind::Box;
    std::string mesh_path;  // relative to the manifest directory
};

struct AssetRecord {
    std::string asset_id;
    std::string category;
    std::string display_name;
    geom::Vec3 dims{1, 1, 1};  // (width, depth, height), meters, > 0
    bool has_front = false;    // local forward axis is +x when true
    ShapeRef shape;
    std::vector<std::string> tags;  // sorted, deduplicated
};

enum class ViolationKind {
    MissingComparisonKeys,
    EmptyTagLevel,
    UnknownTagAssigned,
    UntaggedAsset,
    OrphanTag,
};

enum class Severity { Error, Warning };

const char* to_string(ViolationKind k);
Severity severity(ViolationKind k);

struct TagViolation {
    ViolationKind kind;
    std::string subject;  // asset_id or category name
    std::string detail;
};

// Immutable after load; concurrent readers are safe. Mesh references resolve
// lazily on first use and are cached.
class AssetLibrary {
public:
    static AssetLibrary load(const std::string& manifest_path);

    const std::vector<CategoryEntry>& categories() const { return categories_; }
    const std::vector<AssetRecord>& all_assets() const { return assets_; }

    const AssetRecord* find_asset(const std::string& asset_id) const;
    const AssetRecord& asset(const std::string& asset_id) const;  // throws on miss
    const CategoryEntry* find_category(const std::string& name) const;

    bool tag_exists(const std::string& tag_id) const { return tag_index_.count(tag_id) > 0; }
    const TagEntry* find_tag(const std::string& tag_id) const;

    std::vector<std::string> assets_in_category(const std::string& name) const;

    // Mesh in the asset's local frame: footprint centered at the origin,
    // bottom at z=0, axis-aligned extent equal to dims.
    const geom::TriMesh& mesh(const AssetRecord& rec) const;

    const std::string& manifest_dir() const { return manifest_dir_; }

private:
    std::vector<CategoryEntry> categories_;  // sorted by name
    std::vector<AssetRecord> assets_;        // sorted by asset_id
    std::map<std::string, std::size_t> asset_index_;
    std::map<std::string, std::size_t> category_index_;
    std::map<std::string, std::pair<std::string, int>> tag_index_;  // tag -> (category, level)
    std::string manifest_dir_;

    mutable std::unique_ptr<std::mutex> mesh_mu_ = std::make_unique<std::mutex>();
    mutable std::map<std::string, std::unique_ptr<geom::TriMesh>> mesh_cache_;
};

// Structural checks mirroring the three verification steps: comparison keys
// present for multi-asset categories, no empty tag levels and no untagged
// assets, and tag assignments consistent both ways. OrphanTag is the only
// warning-severity kind.
std::vector<TagViolation> verify_tag_library(const AssetLibrary& lib);

// Assets carrying all required tags, optionally restricted to one category.
// Result is sorted by asset_id. Unknown tags are an error rather than an
// empty result.
std::vector<std::string> query_assets_by_tags(const AssetLibrary& lib, const std::set<std::string>& required,
                                              const std::optional<std::string>& category = std::nullopt);

}  // namespace mvqa::assets
