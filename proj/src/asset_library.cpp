#include "mvqa/asset_library.hpp"

#include <algorithm>
#include <filesystem>

#include <nlohmann/json.hpp>

#include "mvqa/json_io.hpp"
#include "mvqa/obj_io.hpp"

namespace mvqa::assets {

const char* to_string(ViolationKind k) {
    switch (k) {
        case ViolationKind::MissingComparisonKeys: return "MissingComparisonKeys";
        case ViolationKind::EmptyTagLevel: return "EmptyTagLevel";
        case ViolationKind::UnknownTagAssigned: return "UnknownTagAssigned";
        case ViolationKind::UntaggedAsset: return "UntaggedAsset";
        case ViolationKind::OrphanTag: return "OrphanTag";
    }
    return "?";
}

Severity severity(ViolationKind k) {
    return k == ViolationKind::OrphanTag ? Severity::Warning : Severity::Error;
}

AssetLibrary AssetLibrary::load(const std::string& manifest_path) {
    nlohmann::json j = parse_json_file(manifest_path);
    AssetLibrary lib;
    lib.manifest_dir_ = std::filesystem::path(manifest_path).parent_path().string();
    if (lib.manifest_dir_.empty()) lib.manifest_dir_ = ".";

    for (const auto& jc : j.value("categories", nlohmann::json::array())) {
        CategoryEntry cat;
        cat.name = require_string(jc, "name", manifest_path + " category");
        std::string ctx = manifest_path + " category '" + cat.name + "'";
        for (const auto& k : jc.value("comparison_keys", nlohmann::json::array())) {
            if (!k.is_string() || k.get<std::string>().empty())
                throw ParseError(ctx + ": comparison keys must be non-empty strings");
            cat.comparison_keys.push_back(k.get<std::string>());
        }
        for (const auto& jt : jc.value("tags", nlohmann::json::array())) {
            TagEntry tag;
            tag.id = require_string(jt, "id", ctx + " tag");
            tag.level = static_cast<int>(require_int(jt, "level", ctx + " tag '" + tag.id + "'"));
            tag.text = jt.value("text", tag.id);
            if (tag.level < 1) throw ParseError(ctx + ": tag '" + tag.id + "' has level < 1");
            if (tag.level > 4)
                std::fprintf(stderr, "warning: %s: tag '%s' uses level %d (levels above 4 are accepted but unusual)\n",
                             ctx.c_str(), tag.id.c_str(), tag.level);
            cat.tags.push_back(std::move(tag));
        }
        lib.categories_.push_back(std::move(cat));
    }
    std::sort(lib.categories_.begin(), lib.categories_.end(),
              [](const auto& a, const auto& b) { return a.name < b.name; });
    for (std::size_t i = 0; i < lib.categories_.size(); ++i) {
        const auto& cat = lib.categories_[i];
        if (lib.category_index_.count(cat.name))
            throw ParseError(manifest_path + ": duplicate category '" + cat.name + "'");
        lib.category_index_[cat.name] = i;
        for (const auto& tag : cat.tags) {
            if (lib.tag_index_.count(tag.id))
                throw ParseError(manifest_path + ": duplicate tag id '" + tag.id + "'");
            lib.tag_index_[tag.id] = {cat.name, tag.level};
        }
    }

    for (const auto& ja : j.value("assets", nlohmann::json::array())) {
        AssetRecord rec;
        rec.asset_id = require_string(ja, "asset_id", manifest_path + " asset");
        std::string ctx = manifest_path + " asset '" + rec.asset_id + "'";
        rec.category = require_string(ja, "category", ctx);
        rec.display_name = ja.value("display_name", rec.asset_id);
        const auto& dims = require_field(ja, "dims", ctx);
        if (!dims.is_array() || dims.size() != 3) throw ParseError(ctx + ": dims must be [w,d,h]");
        rec.dims = geom::Vec3(dims[0].get<double>(), dims[1].get<double>(), dims[2].get<double>());
        if (!(rec.dims.x() > 0 && rec.dims.y() > 0 && rec.dims.z() > 0))
            throw ParseError(ctx + ": dims must be strictly positive");
        rec.has_front = require_bool(ja, "has_front", ctx);
        if (ja.contains("shape")) {
            const auto& js = ja["shape"];
            std::string kind = require_string(js, "kind", ctx + " shape");
            if (kind == "box") {
                rec.shape.kind = ShapeRef::Kind::Box;
            } else if (kind == "mesh") {
                rec.shape.kind = ShapeRef::Kind::Mesh;
                rec.shape.mesh_path = require_string(js, "path", ctx + " shape");
            } else {
                throw ParseError(ctx + ": unknown shape kind '" + kind + "'");
            }
        }
        for (const auto& t : ja.value("tags", nlohmann::json::array())) {
            if (!t.is_string()) throw ParseError(ctx + ": tags must be strings");
            rec.tags.push_back(t.get<std::string>());
        }
        std::sort(rec.tags.begin(), rec.tags.end());
        rec.tags.erase(std::unique(rec.tags.begin(), rec.tags.end()), rec.tags.end());
        if (!lib.category_index_.count(rec.category))
            throw ParseError(ctx + ": unknown category '" + rec.category + "'");
        lib.assets_.push_back(std::move(rec));
    }
    std::sort(lib.assets_.begin(), lib.assets_.end(),
              [](const auto& a, const auto& b) { return a.asset_id < b.asset_id; });
    for (std::size_t i = 0; i < lib.assets_.size(); ++i) {
        if (lib.asset_index_.count(lib.assets_[i].asset_id))
            throw ParseError(manifest_path + ": duplicate asset_id '" + lib.assets_[i].asset_id + "'");
        lib.asset_index_[lib.assets_[i].asset_id] = i;
    }
    return lib;
}

const AssetRecord* AssetLibrary::find_asset(const std::string& asset_id) const {
    auto it = asset_index_.find(asset_id);
    return it == asset_index_.end() ? nullptr : &assets_[it->second];
}

const AssetRecord& AssetLibrary::asset(const std::string& asset_id) const {
    const AssetRecord* rec = find_asset(asset_id);
    if (!rec) throw std::runtime_error("unknown asset_id '" + asset_id + "'");
    return *rec;
}

const CategoryEntry* AssetLibrary::find_category(const std::string& name) const {
    auto it = category_index_.find(name);
    return it == category_index_.end() ? nullptr : &categories_[it->second];
}

const TagEntry* AssetLibrary::find_tag(const std::string& tag_id) const {
    auto it = tag_index_.find(tag_id);
    if (it == tag_index_.end()) return nullptr;
    const CategoryEntry* cat = find_category(it->second.first);
    for (const auto& t : cat->tags)
        if (t.id == tag_id) return &t;
    return nullptr;
}

std::vector<std::string> AssetLibrary::assets_in_category(const std::string& name) const {
    std::vector<std::string> out;
    for (const auto& a : assets_)
        if (a.category == name) out.push_back(a.asset_id);
    return out;
}

const geom::TriMesh& AssetLibrary::mesh(const AssetRecord& rec) const {
    if (rec.shape.kind != ShapeRef::Kind::Mesh)
        throw std::runtime_error("asset '" + rec.asset_id + "' has no mesh shape");
    std::lock_guard<std::mutex> lock(*mesh_mu_);
    auto it = mesh_cache_.find(rec.asset_id);
    if (it != mesh_cache_.end()) return *it->second;

    std::string path = manifest_dir_ + "/" + rec.shape.mesh_path;
    geom::TriMesh raw = load_obj_mesh(path);

    // Normalize into the asset local frame: footprint centered at the
    // origin, bottom at z = 0, AABB extent (depth, width, height) — local +x
    // is the forward (depth) axis, dims are stored as (w, d, h).
    geom::Vec3 lo = raw.vertices.front(), hi = raw.vertices.front();
    for (const auto& v : raw.vertices) {
        lo = lo.cwiseMin(v);
        hi = hi.cwiseMax(v);
    }
    geom::Vec3 size = hi - lo;
    if (!(size.x() > 0 && size.y() > 0 && size.z() > 0))
        throw std::runtime_error(path + ": mesh has zero extent along an axis");
    geom::Vec3 target(rec.dims.y(), rec.dims.x(), rec.dims.z());
    geom::Vec3 scale = target.cwiseQuotient(size);
    geom::Vec3 mid((lo.x() + hi.x()) / 2, (lo.y() + hi.y()) / 2, lo.z());
    auto normalized = std::make_unique<geom::TriMesh>(raw);
    for (auto& v : normalized->vertices) v = (v - mid).cwiseProduct(scale);
    auto [pos, inserted] = mesh_cache_.emplace(rec.asset_id, std::move(normalized));
    return *pos->second;
}

std::vector<TagViolation> verify_tag_library(const AssetLibrary& lib) {
    std::vector<TagViolation> out;
    std::map<std::string, int> assignment_count;

    for (const auto& cat : lib.categories()) {
        auto members = lib.assets_in_category(cat.name);
        if (members.size() >= 2 && cat.comparison_keys.empty())
            out.push_back({ViolationKind::MissingComparisonKeys, cat.name,
                           "category has " + std::to_string(members.size()) + " assets but no comparison keys"});
        // Declared levels must not be empty: levels 1..max(level) present.
        std::map<int, int> per_level;
        int max_level = 0;
        for (const auto& t : cat.tags) {
            ++per_level[t.level];
            max_level = std::max(max_level, t.level);
        }
        for (int l = 1; l <= max_level; ++l)
            if (!per_level.count(l))
                out.push_back({ViolationKind::EmptyTagLevel, cat.name, "no tags at level " + std::to_string(l)});
        if (!members.empty() && !per_level.count(1))
            out.push_back({ViolationKind::EmptyTagLevel, cat.name, "category has assets but no level-1 tags"});
    }

    for (const auto& rec : lib.all_assets()) {
        bool has_level1 = false;
        for (const auto& tag : rec.tags) {
            if (!lib.tag_exists(tag)) {
                out.push_back({ViolationKind::UnknownTagAssigned, rec.asset_id, "tag '" + tag + "' is not in the library"});
                continue;
            }
            ++assignment_count[tag];
            const TagEntry* t = lib.find_tag(tag);
            if (t && t->level == 1) has_level1 = true;
        }
        if (!has_level1)
            out.push_back({ViolationKind::UntaggedAsset, rec.asset_id, "asset carries no level-1 tag"});
    }

    for (const auto& cat : lib.categories())
        for (const auto& t : cat.tags)
            if (!assignment_count.count(t.id))
                out.push_back({ViolationKind::OrphanTag, cat.name, "tag '" + t.id + "' is assigned to no asset"});
    return out;
}

std::vector<std::string> query_assets_by_tags(const AssetLibrary& lib, const std::set<std::string>& required,
                                              const std::optional<std::string>& category) {
    for (const auto& t : required)
        if (!lib.tag_exists(t)) throw std::runtime_error("query uses unknown tag '" + t + "'");
    std::vector<std::string> out;
    for (const auto& rec : lib.all_assets()) {
        if (category && rec.category != *category) continue;
        bool all = true;
        for (const auto& t : required)
            if (!std::binary_search(rec.tags.begin(), rec.tags.end(), t)) {
                all = false;
                break;
            }
        if (all) out.push_back(rec.asset_id);
    }
    return out;  // assets_ is sorted by asset_id already
}

}  // namespace mvqa::assets
