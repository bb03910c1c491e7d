#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

// Reference implementations used only by tests. None of them call into the
// library's geometry or metric code; boxes and interactions are plain values.
namespace oracle {

struct Box {
  double x1, y1, x2, y2;
};

// IoU of integer boxes by counting unit cells covered by both / either box.
double cell_count_iou(const Box& a, const Box& b);

// IoU from the overlap rectangle, computed without the library.
double iou(const Box& a, const Box& b);

struct Gt {
  Box human;
  Box object;
  std::string object_label;
  std::size_t verb;  // vocabulary index
  int hoi = 0;
};

struct Pred {
  Box human;
  Box object;
  std::string object_label;
  std::string verb;
  double score;
};

struct Image {
  std::vector<Gt> gt;
  std::vector<Pred> preds;
};

using SimFn = std::function<double(const std::string&, const std::string&)>;

// Mean over every GT of the best similarity (floored at 0) among predictions
// whose human and object IoU both reach the gate.
double semantic_recall(const std::vector<Image>& images, const std::vector<std::string>& vocab,
                       const SimFn& sim, double iou_gate);

struct MapResult {
  std::vector<double> map;  // per threshold
  double map_avg = 0.0;
  std::map<int, std::vector<double>> ap;  // class -> per threshold
  std::optional<std::vector<double>> rare;
  std::optional<std::vector<double>> nonrare;
};

// Step-function area sum_i (r_i - r_{i-1}) * p_i over the ranked outcomes
// (true = TP, false = FP); recall uses num_gt as denominator.
double step_integral_ap(const std::vector<bool>& ranked, std::size_t num_gt);

// Brute-force threshold-averaged mAP: explicit candidate matrix per image,
// greedy matching in score order against the unmatched candidate with the
// largest min(human IoU, object IoU), pooling per class across images.
MapResult semantic_map(const std::vector<Image>& images, const std::vector<std::string>& vocab,
                       const SimFn& sim, const std::vector<double>& thresholds, double iou_gate,
                       bool hoi_classes, const std::set<int>* rare_ids = nullptr);

// Cosine similarity read straight from a phrase<TAB>vector file.
class EmbeddingTable {
 public:
  explicit EmbeddingTable(const std::string& path);
  double cosine(const std::string& a, const std::string& b) const;
  bool contains(const std::string& phrase) const { return table_.contains(phrase); }
  std::vector<std::string> phrases() const;

 private:
  std::unordered_map<std::string, std::vector<double>> table_;
};

}  // namespace oracle
