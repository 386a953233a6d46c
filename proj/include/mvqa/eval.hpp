#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mvqa/qagen.hpp"

namespace mvqa::eval {

struct Prediction {
    std::string qid;
    std::string text;  // raw answer payload
    std::vector<std::pair<std::string, geom::Bbox2>> boxes;
    bool structured_boxes = false;
};

using Predictions = std::map<std::string, Prediction>;

Predictions load_predictions(const std::string& path);
Prediction prediction_from_jsonl(const std::string& line, const std::string& context);

// First standalone non-negative integer token, if any.
std::optional<long long> parse_count_token(const std::string& text);

// MCQ answers accepted as 0-based index, letter (A..D), or exact option
// text; first matching rule wins.
std::optional<int> parse_mcq_answer(const std::string& text, const std::vector<std::string>& options);

// Detection boxes from model text: strict "BOXES: view x1 y1 x2 y2; ..."
// lines plus a lenient token scan keyed on the question's view ids.
std::vector<std::pair<std::string, geom::Bbox2>> parse_boxes_text(const std::string& text,
                                                                  const std::vector<std::string>& view_ids);

struct TaskCoverage {
    long long total = 0;
    long long answered = 0;
};

struct EvalReport {
    double mcq_acc = 0.0;  // percent
    TaskCoverage mcq;
    double counting_acc = 0.0;
    double counting_mae = 0.0;
    TaskCoverage counting;
    double det_miou = 0.0;  // percent
    double det_f1 = 0.0;    // percent, IoU > 0.5
    TaskCoverage detection;
    std::vector<std::string> flagged;  // record-level problems (invalid boxes, orphan qids)

    std::string to_json() const;
    std::string to_table() const;
};

double score_mcq(const qa::Dataset& dataset, const Predictions& preds);
std::pair<double, double> score_counting(const qa::Dataset& dataset, const Predictions& preds);  // acc, mae
std::pair<double, double> score_detection(const qa::Dataset& dataset, const Predictions& preds,
                                          std::vector<std::string>* flagged = nullptr);  // miou, f1

EvalReport score(const qa::Dataset& dataset, const Predictions& preds);

// Random baselines, averaged over `trials` with per-question derived seeds.
EvalReport baseline_chance(const qa::Dataset& dataset, std::uint64_t seed, int trials);
EvalReport baseline_frequency(const qa::Dataset& dataset, std::uint64_t seed, int trials);

enum class Axis { Reasoning, Visibility };

struct CurveRow {
    double lo = 0.0;
    double hi = 0.0;
    long long count = 0;
    std::optional<double> metric;  // absent for empty bins
};

// Default bin edges and the paper-style complementary filters (visibility
// < 0.5 on the reasoning axis, reasoning < 6 on the visibility axis).
std::vector<double> default_bins(Axis axis);
std::optional<double> default_filter(Axis axis);

// Metric per bin over questions passing the complementary-axis filter.
// Rows partition the filtered set; the last bin includes its upper edge.
std::vector<CurveRow> difficulty_curve(const qa::Dataset& dataset, const Predictions& preds, Axis axis,
                                       qa::Task task, const std::vector<double>& bin_edges,
                                       std::optional<double> complementary_filter);

std::string curve_to_csv(const std::vector<CurveRow>& rows);

struct DatasetStats {
    long long mcq = 0, counting = 0, detection = 0;
    std::map<int, std::map<int, long long>> mcq_positions;  // option count -> position -> n
    std::map<long long, long long> counting_answers;
    std::array<double, 32 * 32> det_heatmap{};  // normalized to sum 1 over gt boxes
    std::map<std::string, long long> vocabulary;

    std::string to_json() const;
};

DatasetStats dataset_stats(const qa::Dataset& dataset);

}  // namespace mvqa::eval
