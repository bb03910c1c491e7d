#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace oracle {

double cell_count_iou(const Box& a, const Box& b) {
  const int lo_x = static_cast<int>(std::min(a.x1, b.x1));
  const int hi_x = static_cast<int>(std::max(a.x2, b.x2));
  const int lo_y = static_cast<int>(std::min(a.y1, b.y1));
  const int hi_y = static_cast<int>(std::max(a.y2, b.y2));
  long both = 0;
  long either = 0;
  for (int y = lo_y; y < hi_y; ++y) {
    for (int x = lo_x; x < hi_x; ++x) {
      const double cx = x + 0.5;
      const double cy = y + 0.5;
      const bool in_a = cx > a.x1 && cx < a.x2 && cy > a.y1 && cy < a.y2;
      const bool in_b = cx > b.x1 && cx < b.x2 && cy > b.y1 && cy < b.y2;
      both += in_a && in_b;
      either += in_a || in_b;
    }
  }
  return either == 0 ? 0.0 : static_cast<double>(both) / static_cast<double>(either);
}

double iou(const Box& a, const Box& b) {
  const double left = a.x1 > b.x1 ? a.x1 : b.x1;
  const double right = a.x2 < b.x2 ? a.x2 : b.x2;
  const double top = a.y1 > b.y1 ? a.y1 : b.y1;
  const double bottom = a.y2 < b.y2 ? a.y2 : b.y2;
  if (right <= left || bottom <= top) return 0.0;
  const double overlap = (right - left) * (bottom - top);
  const double area_a = (a.x2 - a.x1) * (a.y2 - a.y1);
  const double area_b = (b.x2 - b.x1) * (b.y2 - b.y1);
  return overlap / (area_a + area_b - overlap);
}

namespace {

bool gate(const Pred& p, const Gt& g, double iou_gate) {
  return iou(p.human, g.human) >= iou_gate && iou(p.object, g.object) >= iou_gate;
}

double mean(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

struct Entry {
  double score;
  std::size_t image;
  std::size_t pred;
  int kind;  // 1 TP, 0 duplicate, -1 ignored
};

}  // namespace

double semantic_recall(const std::vector<Image>& images, const std::vector<std::string>& vocab,
                       const SimFn& sim, double iou_gate) {
  std::vector<double> terms;
  for (const auto& img : images) {
    for (const auto& g : img.gt) {
      double best = 0.0;
      for (const auto& p : img.preds) {
        if (!gate(p, g, iou_gate)) continue;
        const double s = sim(p.verb, vocab[g.verb]);
        if (s > best) best = s;
      }
      terms.push_back(best > 1.0 ? 1.0 : best);
    }
  }
  if (terms.empty()) throw std::runtime_error("oracle: no ground truth");
  return mean(terms);
}

double step_integral_ap(const std::vector<bool>& ranked, std::size_t num_gt) {
  if (num_gt == 0) return 0.0;
  double area = 0.0;
  double prev_recall = 0.0;
  std::size_t tp = 0;
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    if (ranked[i]) ++tp;
    const double precision = static_cast<double>(tp) / static_cast<double>(i + 1);
    const double recall = static_cast<double>(tp) / static_cast<double>(num_gt);
    area += (recall - prev_recall) * precision;
    prev_recall = recall;
  }
  return area;
}

MapResult semantic_map(const std::vector<Image>& images, const std::vector<std::string>& vocab,
                       const SimFn& sim, const std::vector<double>& thresholds, double iou_gate,
                       bool hoi_classes, const std::set<int>* rare_ids) {
  auto gt_class = [&](const Gt& g) { return hoi_classes ? g.hoi : static_cast<int>(g.verb); };

  std::map<int, std::size_t> gt_count;
  for (const auto& img : images) {
    for (const auto& g : img.gt) ++gt_count[gt_class(g)];
  }

  MapResult result;
  for (const auto& [cls, n] : gt_count) result.ap[cls].assign(thresholds.size(), 0.0);

  for (std::size_t t = 0; t < thresholds.size(); ++t) {
    const double tau = thresholds[t];
    std::map<int, std::vector<Entry>> pooled;
    for (std::size_t im = 0; im < images.size(); ++im) {
      const auto& img = images[im];
      // Every (prediction, class) the prediction expands into at this tau.
      struct Expanded {
        std::size_t pred;
        int cls;
      };
      std::vector<Expanded> expanded;
      for (std::size_t p = 0; p < img.preds.size(); ++p) {
        for (std::size_t v = 0; v < vocab.size(); ++v) {
          if (!(sim(img.preds[p].verb, vocab[v]) >= tau)) continue;
          if (!hoi_classes) {
            expanded.push_back({p, static_cast<int>(v)});
            continue;
          }
          for (const auto& g : img.gt) {
            if (g.verb == v && g.object_label == img.preds[p].object_label) {
              expanded.push_back({p, g.hoi});
              break;
            }
          }
        }
      }
      // Candidate matrix: same class and both boxes pass the gate.
      std::vector<std::vector<bool>> cand(expanded.size(), std::vector<bool>(img.gt.size()));
      for (std::size_t e = 0; e < expanded.size(); ++e) {
        for (std::size_t g = 0; g < img.gt.size(); ++g) {
          cand[e][g] = gt_class(img.gt[g]) == expanded[e].cls &&
                       gate(img.preds[expanded[e].pred], img.gt[g], iou_gate);
        }
      }
      std::vector<std::size_t> order(expanded.size());
      for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
      std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const auto& pa = img.preds[expanded[a].pred];
        const auto& pb = img.preds[expanded[b].pred];
        if (pa.score != pb.score) return pa.score > pb.score;
        return expanded[a].pred < expanded[b].pred;
      });
      std::vector<bool> taken(img.gt.size(), false);
      for (std::size_t e : order) {
        const auto& p = img.preds[expanded[e].pred];
        int best = -1;
        double best_overlap = -1.0;
        bool any = false;
        for (std::size_t g = 0; g < img.gt.size(); ++g) {
          if (!cand[e][g]) continue;
          any = true;
          if (taken[g]) continue;
          const double a = iou(p.human, img.gt[g].human);
          const double b = iou(p.object, img.gt[g].object);
          const double overlap = a < b ? a : b;
          if (overlap > best_overlap) {
            best_overlap = overlap;
            best = static_cast<int>(g);
          }
        }
        int kind = -1;
        if (best >= 0) {
          taken[static_cast<std::size_t>(best)] = true;
          kind = 1;
        } else if (any) {
          kind = 0;
        }
        pooled[expanded[e].cls].push_back({p.score, im, expanded[e].pred, kind});
      }
    }
    for (auto& [cls, entries] : pooled) {
      if (!gt_count.contains(cls)) continue;
      std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
        if (a.score != b.score) return a.score > b.score;
        if (a.image != b.image) return a.image < b.image;
        return a.pred < b.pred;
      });
      std::vector<bool> ranked;
      for (const auto& e : entries) {
        if (e.kind >= 0) ranked.push_back(e.kind == 1);
      }
      result.ap[cls][t] = step_integral_ap(ranked, gt_count.at(cls));
    }
  }

  auto split_map = [&](auto keep) {
    std::vector<double> per(thresholds.size(), 0.0);
    for (std::size_t t = 0; t < thresholds.size(); ++t) {
      std::vector<double> aps;
      for (const auto& [cls, ap] : result.ap) {
        if (keep(cls)) aps.push_back(ap[t]);
      }
      per[t] = mean(aps);
    }
    return per;
  };
  result.map = split_map([](int) { return true; });
  result.map_avg = mean(result.map);
  if (hoi_classes && rare_ids) {
    result.rare = split_map([&](int c) { return rare_ids->contains(c); });
    result.nonrare = split_map([&](int c) { return !rare_ids->contains(c); });
  }
  return result;
}

EmbeddingTable::EmbeddingTable(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("oracle: cannot open " + path);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto tab = line.find('\t');
    std::istringstream values(line.substr(tab + 1));
    std::vector<double> v;
    double x;
    while (values >> x) v.push_back(x);
    table_.emplace(line.substr(0, tab), std::move(v));
  }
}

double EmbeddingTable::cosine(const std::string& a, const std::string& b) const {
  const auto& u = table_.at(a);
  const auto& v = table_.at(b);
  long double dot = 0, nu = 0, nv = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += static_cast<long double>(u[i]) * v[i];
    nu += static_cast<long double>(u[i]) * u[i];
    nv += static_cast<long double>(v[i]) * v[i];
  }
  return static_cast<double>(dot / std::sqrt(nu * nv));
}

std::vector<std::string> EmbeddingTable::phrases() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : table_) out.push_back(k);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace oracle
