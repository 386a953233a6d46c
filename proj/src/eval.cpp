#include "mvqa/eval.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "mvqa/json_io.hpp"
#include "mvqa/rng.hpp"

namespace mvqa::eval {

Prediction prediction_from_jsonl(const std::string& line, const std::string& context) {
    nlohmann::json j = parse_json_text(line, context);
    Prediction p;
    p.qid = require_string(j, "qid", context);
    const auto& ans = require_field(j, "answer", context);
    if (ans.is_string()) {
        p.text = ans.get<std::string>();
    } else if (ans.is_number()) {
        p.text = ans.dump();
    } else if (ans.is_array()) {
        p.structured_boxes = true;
        for (const auto& jb : ans) {
            const auto& box = require_field(jb, "box", context);
            p.boxes.push_back({require_string(jb, "view_id", context),
                               {box[0].get<double>(), box[1].get<double>(), box[2].get<double>(),
                                box[3].get<double>()}});
        }
    } else {
        throw ParseError(context + ": answer must be a string, number or box array");
    }
    return p;
}

Predictions load_predictions(const std::string& path) {
    Predictions out;
    std::istringstream in(read_text_file(path));
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        Prediction p = prediction_from_jsonl(line, path + ":" + std::to_string(lineno));
        out[p.qid] = std::move(p);
    }
    return out;
}

std::optional<long long> parse_count_token(const std::string& text) {
    std::istringstream in(text);
    std::string token;
    while (in >> token) {
        // Strip surrounding punctuation.
        std::size_t b = 0, e = token.size();
        while (b < e && !std::isalnum(static_cast<unsigned char>(token[b]))) ++b;
        while (e > b && !std::isalnum(static_cast<unsigned char>(token[e - 1]))) --e;
        if (b >= e) continue;
        std::string core = token.substr(b, e - b);
        if (core.find_first_not_of("0123456789") != std::string::npos) continue;
        try {
            return std::stoll(core);
        } catch (...) {
            continue;  // overflow: keep scanning
        }
    }
    return std::nullopt;
}

namespace {

std::string trim_lower(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    std::string out = s.substr(b, e - b);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

}  // namespace

std::optional<int> parse_mcq_answer(const std::string& text, const std::vector<std::string>& options) {
    std::string t = trim_lower(text);
    if (t.empty()) return std::nullopt;
    // Strip trailing punctuation like "B." or "2)".
    while (!t.empty() && (t.back() == '.' || t.back() == ')' || t.back() == ':')) t.pop_back();

    if (!t.empty() && t.find_first_not_of("0123456789") == std::string::npos) {
        int idx = std::stoi(t);
        if (idx >= 0 && idx < static_cast<int>(options.size())) return idx;
        return std::nullopt;
    }
    if (t.size() == 1 && t[0] >= 'a' && t[0] <= 'd') {
        int idx = t[0] - 'a';
        if (idx < static_cast<int>(options.size())) return idx;
        return std::nullopt;
    }
    for (std::size_t i = 0; i < options.size(); ++i)
        if (trim_lower(options[i]) == t) return static_cast<int>(i);
    return std::nullopt;
}

std::vector<std::pair<std::string, geom::Bbox2>> parse_boxes_text(const std::string& text,
                                                                  const std::vector<std::string>& view_ids) {
    std::vector<std::pair<std::string, geom::Bbox2>> out;
    // Strict form first: a "BOXES:" line of semicolon-separated entries.
    std::size_t tag = text.find("BOXES:");
    std::string body = tag == std::string::npos ? text : text.substr(tag + 6);

    std::istringstream in(body);
    std::string token;
    std::string pending_view;
    std::vector<double> nums;
    auto flush = [&]() {
        if (!pending_view.empty() && nums.size() >= 4)
            out.push_back({pending_view, {nums[0], nums[1], nums[2], nums[3]}});
        nums.clear();
    };
    while (in >> token) {
        // Semicolons separate entries.
        while (!token.empty() && (token.back() == ';' || token.back() == ',')) token.pop_back();
        if (token.empty()) continue;
        bool is_view = std::find(view_ids.begin(), view_ids.end(), token) != view_ids.end();
        if (is_view) {
            flush();
            pending_view = token;
            continue;
        }
        char* end = nullptr;
        double v = std::strtod(token.c_str(), &end);
        if (end && *end == '\0' && !pending_view.empty()) {
            nums.push_back(v);
            if (nums.size() == 4) {
                flush();
                // keep the view for another box in the same view
            }
        }
    }
    flush();
    return out;
}

double score_mcq(const qa::Dataset& dataset, const Predictions& preds) {
    long long total = 0, correct = 0;
    for (const auto& q : dataset.questions) {
        if (q.task != qa::Task::MCQ) continue;
        ++total;
        auto it = preds.find(q.qid);
        if (it == preds.end()) continue;
        auto idx = parse_mcq_answer(it->second.text, q.options);
        if (idx && *idx == q.answer_index) ++correct;
    }
    return total == 0 ? 0.0 : 100.0 * correct / total;
}

std::pair<double, double> score_counting(const qa::Dataset& dataset, const Predictions& preds) {
    long long total = 0, correct = 0;
    double abs_err = 0.0;
    for (const auto& q : dataset.questions) {
        if (q.task != qa::Task::Counting) continue;
        ++total;
        long long pred = 0;  // unparseable or missing scores as 0 and wrong
        bool parsed = false;
        auto it = preds.find(q.qid);
        if (it != preds.end()) {
            auto v = parse_count_token(it->second.text);
            if (v) {
                pred = *v;
                parsed = true;
            }
        }
        if (parsed && pred == q.count_answer) ++correct;
        abs_err += std::abs(static_cast<double>(pred - q.count_answer));
    }
    if (total == 0) return {0.0, 0.0};
    return {100.0 * correct / total, abs_err / total};
}

namespace {

struct DetScore {
    double miou = 0.0;  // fraction, not percent
    double f1 = 0.0;
};

DetScore score_detection_question(const qa::QuestionInstance& q,
                                  const std::vector<std::pair<std::string, geom::Bbox2>>& pred_boxes) {
    struct Cand {
        double iou;
        std::size_t pi, gi;
    };
    std::vector<Cand> cands;
    for (std::size_t pi = 0; pi < pred_boxes.size(); ++pi)
        for (std::size_t gi = 0; gi < q.gt_boxes.size(); ++gi) {
            if (pred_boxes[pi].first != q.gt_boxes[gi].first) continue;
            cands.push_back({geom::iou(pred_boxes[pi].second, q.gt_boxes[gi].second), pi, gi});
        }
    std::stable_sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
        if (a.iou != b.iou) return a.iou > b.iou;
        return std::tie(a.pi, a.gi) < std::tie(b.pi, b.gi);
    });
    std::vector<bool> pused(pred_boxes.size(), false), gused(q.gt_boxes.size(), false);
    double iou_sum = 0.0;
    long long tp = 0;
    for (const auto& c : cands) {
        if (pused[c.pi] || gused[c.gi]) continue;
        pused[c.pi] = true;
        gused[c.gi] = true;
        iou_sum += c.iou;
        if (c.iou > 0.5) ++tp;  // strict
    }
    DetScore s;
    s.miou = q.gt_boxes.empty() ? 0.0 : iou_sum / q.gt_boxes.size();
    if (!pred_boxes.empty() && !q.gt_boxes.empty() && tp > 0) {
        double precision = static_cast<double>(tp) / pred_boxes.size();
        double recall = static_cast<double>(tp) / q.gt_boxes.size();
        s.f1 = 2.0 * precision * recall / (precision + recall);
    }
    return s;
}

std::vector<std::pair<std::string, geom::Bbox2>> prediction_boxes(const qa::QuestionInstance& q,
                                                                  const Prediction& p) {
    if (p.structured_boxes) return p.boxes;
    return parse_boxes_text(p.text, q.view_ids);
}

}  // namespace

std::pair<double, double> score_detection(const qa::Dataset& dataset, const Predictions& preds,
                                          std::vector<std::string>* flagged) {
    long long total = 0;
    double miou_sum = 0.0, f1_sum = 0.0;
    for (const auto& q : dataset.questions) {
        if (q.task != qa::Task::Detection) continue;
        ++total;
        auto it = preds.find(q.qid);
        if (it == preds.end()) continue;
        auto boxes = prediction_boxes(q, it->second);
        bool invalid = false;
        for (const auto& [_, b] : boxes)
            if (!b.ordered()) invalid = true;
        if (invalid) {
            if (flagged) flagged->push_back(q.qid + ": malformed box (min > max), scored 0");
            continue;
        }
        auto s = score_detection_question(q, boxes);
        miou_sum += s.miou;
        f1_sum += s.f1;
    }
    if (total == 0) return {0.0, 0.0};
    return {100.0 * miou_sum / total, 100.0 * f1_sum / total};
}

EvalReport score(const qa::Dataset& dataset, const Predictions& preds) {
    EvalReport r;
    for (const auto& q : dataset.questions) {
        TaskCoverage* cov = q.task == qa::Task::MCQ        ? &r.mcq
                            : q.task == qa::Task::Counting ? &r.counting
                                                           : &r.detection;
        ++cov->total;
        if (preds.count(q.qid)) ++cov->answered;
    }
    std::set<std::string> known;
    for (const auto& q : dataset.questions) known.insert(q.qid);
    for (const auto& [qid, _] : preds)
        if (!known.count(qid)) r.flagged.push_back(qid + ": prediction does not match any question");

    r.mcq_acc = score_mcq(dataset, preds);
    std::tie(r.counting_acc, r.counting_mae) = score_counting(dataset, preds);
    std::tie(r.det_miou, r.det_f1) = score_detection(dataset, preds, &r.flagged);
    return r;
}

std::string EvalReport::to_json() const {
    JsonWriter w;
    w.begin_object();
    w.key("mcq");
    w.begin_object();
    w.kv("acc", mcq_acc);
    w.kv("total", mcq.total);
    w.kv("answered", mcq.answered);
    w.end_object();
    w.key("counting");
    w.begin_object();
    w.kv("acc", counting_acc);
    w.kv("mae", counting_mae);
    w.kv("total", counting.total);
    w.kv("answered", counting.answered);
    w.end_object();
    w.key("detection");
    w.begin_object();
    w.kv("miou", det_miou);
    w.kv("f1", det_f1);
    w.kv("total", detection.total);
    w.kv("answered", detection.answered);
    w.end_object();
    w.key("flagged");
    w.begin_array();
    for (const auto& f : flagged) w.value(f);
    w.end_array();
    w.end_object();
    return w.str() + "\n";
}

std::string EvalReport::to_table() const {
    char buf[512];
    std::string out;
    out += "task        metric            value     answered/total\n";
    out += "----------  ----------------  --------  --------------\n";
    std::snprintf(buf, sizeof(buf), "mcq         acc (%%)           %8.2f  %lld/%lld\n", mcq_acc,
                  mcq.answered, mcq.total);
    out += buf;
    std::snprintf(buf, sizeof(buf), "counting    acc (%%)           %8.2f  %lld/%lld\n", counting_acc,
                  counting.answered, counting.total);
    out += buf;
    std::snprintf(buf, sizeof(buf), "counting    mae               %8.3f\n", counting_mae);
    out += buf;
    std::snprintf(buf, sizeof(buf), "detection   miou (%%)          %8.2f  %lld/%lld\n", det_miou,
                  detection.answered, detection.total);
    out += buf;
    std::snprintf(buf, sizeof(buf), "detection   f1@iou>0.5 (%%)    %8.2f\n", det_f1);
    out += buf;
    if (!flagged.empty()) out += "flagged records: " + std::to_string(flagged.size()) + "\n";
    return out;
}

namespace {

struct BaselineAccum {
    long long mcq_n = 0, mcq_correct = 0;
    long long cnt_n = 0, cnt_correct = 0;
    double cnt_abs = 0.0;
    long long det_n = 0;
    double det_miou = 0.0, det_f1 = 0.0;

    EvalReport report(const qa::Dataset& dataset, int trials) const {
        EvalReport r;
        for (const auto& q : dataset.questions) {
            if (q.task == qa::Task::MCQ) ++r.mcq.total;
            if (q.task == qa::Task::Counting) ++r.counting.total;
            if (q.task == qa::Task::Detection) ++r.detection.total;
        }
        r.mcq.answered = r.mcq.total;
        r.counting.answered = r.counting.total;
        r.detection.answered = r.detection.total;
        (void)trials;
        if (mcq_n) r.mcq_acc = 100.0 * mcq_correct / mcq_n;
        if (cnt_n) {
            r.counting_acc = 100.0 * cnt_correct / cnt_n;
            r.counting_mae = cnt_abs / cnt_n;
        }
        if (det_n) {
            r.det_miou = 100.0 * det_miou / det_n;
            r.det_f1 = 100.0 * det_f1 / det_n;
        }
        return r;
    }
};

}  // namespace

EvalReport baseline_chance(const qa::Dataset& dataset, std::uint64_t seed, int trials) {
    if (trials < 1) throw std::invalid_argument("baseline trials must be >= 1");
    long long cnt_lo = 0, cnt_hi = 0;
    bool have_counting = false;
    for (const auto& q : dataset.questions) {
        if (q.task != qa::Task::Counting) continue;
        if (!have_counting) {
            cnt_lo = cnt_hi = q.count_answer;
            have_counting = true;
        }
        cnt_lo = std::min(cnt_lo, q.count_answer);
        cnt_hi = std::max(cnt_hi, q.count_answer);
    }

    BaselineAccum acc;
    for (const auto& q : dataset.questions) {
        Rng rng(derive_seed(seed, {"chance", q.qid}));
        for (int t = 0; t < trials; ++t) {
            switch (q.task) {
                case qa::Task::MCQ: {
                    ++acc.mcq_n;
                    auto pick = static_cast<int>(rng.below(q.options.size()));
                    if (pick == q.answer_index) ++acc.mcq_correct;
                    break;
                }
                case qa::Task::Counting: {
                    ++acc.cnt_n;
                    long long pick = have_counting ? rng.uniform_int(cnt_lo, cnt_hi) : 0;
                    if (pick == q.count_answer) ++acc.cnt_correct;
                    acc.cnt_abs += std::abs(static_cast<double>(pick - q.count_answer));
                    break;
                }
                case qa::Task::Detection: {
                    ++acc.det_n;
                    // One uniform random valid box in the answer view.
                    double w = q.image_width > 0 ? q.image_width : 1024;
                    double h = q.image_height > 0 ? q.image_height : 768;
                    double x1 = rng.uniform(0, w), x2 = rng.uniform(0, w);
                    double y1 = rng.uniform(0, h), y2 = rng.uniform(0, h);
                    if (x1 > x2) std::swap(x1, x2);
                    if (y1 > y2) std::swap(y1, y2);
                    std::vector<std::pair<std::string, geom::Bbox2>> boxes = {
                        {q.gt_boxes.empty() ? (q.view_ids.empty() ? std::string() : q.view_ids.front())
                                            : q.gt_boxes.front().first,
                         {x1, y1, x2, y2}}};
                    auto s = score_detection_question(q, boxes);
                    acc.det_miou += s.miou;
                    acc.det_f1 += s.f1;
                    break;
                }
            }
        }
    }
    return acc.report(dataset, trials);
}

EvalReport baseline_frequency(const qa::Dataset& dataset, std::uint64_t seed, int trials) {
    if (trials < 1) throw std::invalid_argument("baseline trials must be >= 1");
    // Empirical answer pools per task.
    std::map<std::size_t, std::vector<int>> mcq_positions;  // by option count
    std::vector<long long> counting_answers;
    std::vector<geom::Bbox2> gt_boxes;
    for (const auto& q : dataset.questions) {
        if (q.task == qa::Task::MCQ) mcq_positions[q.options.size()].push_back(q.answer_index);
        if (q.task == qa::Task::Counting) counting_answers.push_back(q.count_answer);
        if (q.task == qa::Task::Detection)
            for (const auto& [_, b] : q.gt_boxes) gt_boxes.push_back(b);
    }

    BaselineAccum acc;
    for (const auto& q : dataset.questions) {
        Rng rng(derive_seed(seed, {"frequency", q.qid}));
        for (int t = 0; t < trials; ++t) {
            switch (q.task) {
                case qa::Task::MCQ: {
                    ++acc.mcq_n;
                    const auto& pool = mcq_positions[q.options.size()];
                    int pick = pool[rng.below(pool.size())];
                    if (pick == q.answer_index) ++acc.mcq_correct;
                    break;
                }
                case qa::Task::Counting: {
                    ++acc.cnt_n;
                    long long pick = counting_answers[rng.below(counting_answers.size())];
                    if (pick == q.count_answer) ++acc.cnt_correct;
                    acc.cnt_abs += std::abs(static_cast<double>(pick - q.count_answer));
                    break;
                }
                case qa::Task::Detection: {
                    ++acc.det_n;
                    // A gt box drawn from the split, placed in the answer view.
                    const geom::Bbox2& b = gt_boxes[rng.below(gt_boxes.size())];
                    std::vector<std::pair<std::string, geom::Bbox2>> boxes = {
                        {q.gt_boxes.empty() ? std::string() : q.gt_boxes.front().first, b}};
                    auto s = score_detection_question(q, boxes);
                    acc.det_miou += s.miou;
                    acc.det_f1 += s.f1;
                    break;
                }
            }
        }
    }
    return acc.report(dataset, trials);
}

std::vector<double> default_bins(Axis axis) {
    if (axis == Axis::Visibility) return {0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
    return {0.0, 2.0, 3.0, 4.0, 5.0, 6.0, 8.0, 1e9};
}

std::optional<double> default_filter(Axis axis) {
    // Reasoning curves restrict visibility below 0.5; visibility curves
    // restrict reasoning below 6.
    return axis == Axis::Reasoning ? std::optional<double>(0.5) : std::optional<double>(6.0);
}

std::vector<CurveRow> difficulty_curve(const qa::Dataset& dataset, const Predictions& preds, Axis axis,
                                       qa::Task task, const std::vector<double>& bin_edges,
                                       std::optional<double> complementary_filter) {
    if (bin_edges.size() < 2) throw std::invalid_argument("difficulty_curve: need at least one bin");
    for (std::size_t i = 1; i < bin_edges.size(); ++i)
        if (!(bin_edges[i] > bin_edges[i - 1])) throw std::invalid_argument("bin edges must be increasing");

    std::vector<qa::Dataset> bins(bin_edges.size() - 1);
    for (const auto& q : dataset.questions) {
        if (q.task != task) continue;
        double complementary = axis == Axis::Reasoning ? q.visibility_difficulty : q.reasoning_difficulty;
        if (complementary_filter && complementary >= *complementary_filter) continue;
        double x = axis == Axis::Reasoning ? q.reasoning_difficulty : q.visibility_difficulty;
        for (std::size_t b = 0; b + 1 < bin_edges.size(); ++b) {
            bool last = b + 2 == bin_edges.size();
            if (x >= bin_edges[b] && (x < bin_edges[b + 1] || (last && x == bin_edges[b + 1]))) {
                bins[b].questions.push_back(q);
                break;
            }
        }
    }

    std::vector<CurveRow> rows;
    for (std::size_t b = 0; b + 1 < bin_edges.size(); ++b) {
        CurveRow row;
        row.lo = bin_edges[b];
        row.hi = bin_edges[b + 1];
        row.count = static_cast<long long>(bins[b].questions.size());
        if (row.count > 0) {
            switch (task) {
                case qa::Task::MCQ: row.metric = score_mcq(bins[b], preds); break;
                case qa::Task::Counting: row.metric = score_counting(bins[b], preds).first; break;
                case qa::Task::Detection: row.metric = score_detection(bins[b], preds).first; break;
            }
        }
        rows.push_back(row);
    }
    return rows;
}

std::string curve_to_csv(const std::vector<CurveRow>& rows) {
    std::string out = "bin_lo,bin_hi,count,metric\n";
    for (const auto& r : rows) {
        out += format_real(r.lo) + "," + format_real(r.hi) + "," + std::to_string(r.count) + ",";
        if (r.metric) out += format_real(*r.metric);
        out += "\n";
    }
    return out;
}

DatasetStats dataset_stats(const qa::Dataset& dataset) {
    DatasetStats s;
    double heat_total = 0.0;
    for (const auto& q : dataset.questions) {
        // Vocabulary over question text.
        std::string word;
        for (char c : q.text + " ") {
            if (std::isalpha(static_cast<unsigned char>(c))) {
                word += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
            } else if (!word.empty()) {
                ++s.vocabulary[word];
                word.clear();
            }
        }
        switch (q.task) {
            case qa::Task::MCQ:
                ++s.mcq;
                ++s.mcq_positions[static_cast<int>(q.options.size())][q.answer_index];
                break;
            case qa::Task::Counting:
                ++s.counting;
                ++s.counting_answers[q.count_answer];
                break;
            case qa::Task::Detection: {
                ++s.detection;
                double w = q.image_width > 0 ? q.image_width : 1024;
                double h = q.image_height > 0 ? q.image_height : 768;
                for (const auto& [_, b] : q.gt_boxes) {
                    // Accumulate the box coverage over a 32x32 grid.
                    for (int gy = 0; gy < 32; ++gy)
                        for (int gx = 0; gx < 32; ++gx) {
                            double cx0 = gx * w / 32, cx1 = (gx + 1) * w / 32;
                            double cy0 = gy * h / 32, cy1 = (gy + 1) * h / 32;
                            double ix = std::max(0.0, std::min(b.x_max, cx1) - std::max(b.x_min, cx0));
                            double iy = std::max(0.0, std::min(b.y_max, cy1) - std::max(b.y_min, cy0));
                            double a = ix * iy;
                            s.det_heatmap[gy * 32 + gx] += a;
                            heat_total += a;
                        }
                }
                break;
            }
        }
    }
    if (heat_total > 0)
        for (auto& v : s.det_heatmap) v /= heat_total;
    return s;
}

std::string DatasetStats::to_json() const {
    JsonWriter w;
    w.begin_object();
    w.key("tasks");
    w.begin_object();
    w.kv("mcq", mcq);
    w.kv("counting", counting);
    w.kv("detection", detection);
    w.end_object();
    w.key("mcq_correct_positions");
    w.begin_object();
    for (const auto& [k, hist] : mcq_positions) {
        w.key(std::to_string(k) + "_options");
        w.begin_array();
        int max_pos = 0;
        for (const auto& [p, _] : hist) max_pos = std::max(max_pos, p);
        for (int p = 0; p <= std::max(max_pos, k - 1); ++p) {
            auto it = hist.find(p);
            w.value(it == hist.end() ? std::int64_t(0) : std::int64_t(it->second));
        }
        w.end_array();
    }
    w.end_object();
    w.key("counting_answers");
    w.begin_object();
    for (const auto& [v, n] : counting_answers) w.kv(std::to_string(v), n);
    w.end_object();
    w.key("detection_heatmap_32x32");
    w.begin_array();
    for (double v : det_heatmap) w.value(v);
    w.end_array();
    w.key("vocabulary");
    w.begin_object();
    for (const auto& [word, n] : vocabulary) w.kv(word, n);
    w.end_object();
    w.end_object();
    return w.str() + "\n";
}

}  // namespace mvqa::eval
