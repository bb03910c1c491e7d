#include "uhoi/transcript.hpp"

#include <fstream>
#include <set>

#include <spdlog/spdlog.h>

#include "uhoi/error.hpp"

namespace uhoi {

namespace {

using ojson = nlohmann::ordered_json;

ojson detection_to_json(const Detection& d) {
  return {{"box", box_to_json(d.box)}, {"label", d.label}, {"score", d.score}};
}

Detection detection_from_json(const nlohmann::json& v) {
  return Detection::make(box_from_json(v.at("box")), v.at("label").get<std::string>(),
                         v.at("score").get<double>());
}

template <typename F>
void for_each_line(const std::string& path, F&& f) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty()) continue;
    f(line, number);
  }
}

nlohmann::json parse_line(const std::string& line) {
  auto v = nlohmann::json::parse(line, nullptr, false);
  if (v.is_discarded()) throw ParseError("malformed JSON line");
  return v;
}

}  // namespace

ojson pair_record_to_json(const PairRecord& r) {
  ojson j;
  j["pair_id"] = r.pair.pair_id;
  j["image_id"] = r.pair.image_id;
  j["human_index"] = r.pair.human_index;
  j["object_index"] = r.pair.object_index;
  j["human"] = detection_to_json(r.pair.human);
  j["object"] = detection_to_json(r.pair.object);
  j["union_box"] = box_to_json(r.pair.region().box);
  j["visual_prompt"] = r.visual_prompt_path.empty() ? ojson(nullptr) : ojson(r.visual_prompt_path);
  return j;
}

PairRecord pair_record_from_json(const nlohmann::json& v) {
  try {
    PairRecord r{HumanObjectPair{v.at("pair_id").get<std::string>(),
                                 v.at("image_id").get<std::string>(),
                                 v.at("human_index").get<std::size_t>(),
                                 v.at("object_index").get<std::size_t>(),
                                 detection_from_json(v.at("human")),
                                 detection_from_json(v.at("object"))},
                 {}};
    if (v.contains("visual_prompt") && v["visual_prompt"].is_string()) {
      r.visual_prompt_path = v["visual_prompt"].get<std::string>();
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed pair record: ") + e.what());
  }
}

void write_pairs(const std::string& path, const std::vector<PairRecord>& pairs) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ParseError("cannot write " + path);
  for (const auto& p : pairs) out << pair_record_to_json(p).dump() << '\n';
}

std::vector<PairRecord> read_pairs(const std::string& path) {
  std::vector<PairRecord> pairs;
  for_each_line(path, [&](const std::string& line, std::size_t number) {
    try {
      pairs.push_back(pair_record_from_json(parse_line(line)));
    } catch (const ParseError& e) {
      throw ParseError(path + ":" + std::to_string(number) + ": " + e.what());
    }
  });
  return pairs;
}

ojson transcript_record_to_json(const TranscriptRecord& r) {
  return {{"pair_id", r.pair_id},
          {"prompt_kind", to_string(r.prompt_kind)},
          {"sample_index", r.sample_index},
          {"text", r.text}};
}

TranscriptRecord transcript_record_from_json(const nlohmann::json& v) {
  try {
    return {v.at("pair_id").get<std::string>(),
            parse_prompt_kind(v.at("prompt_kind").get<std::string>()),
            v.at("sample_index").get<int>(), v.at("text").get<std::string>()};
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed transcript record: ") + e.what());
  }
}

TranscriptContents read_transcript(const std::string& path) {
  TranscriptContents contents;
  std::ifstream in(path, std::ios::binary);
  if (!in) return contents;
  std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::size_t pos = 0;
  std::size_t number = 0;
  while (pos < data.size()) {
    const auto nl = data.find('\n', pos);
    const bool terminated = nl != std::string::npos;
    const std::string line = data.substr(pos, terminated ? nl - pos : std::string::npos);
    pos = terminated ? nl + 1 : data.size();
    ++number;
    if (line.empty()) continue;
    auto v = nlohmann::json::parse(line, nullptr, false);
    if (v.is_discarded() && !terminated) {
      spdlog::warn("{}:{}: skipping truncated final line", path, number);
      ++contents.skipped_lines;
      continue;
    }
    if (v.is_discarded()) {
      throw ParseError(path + ":" + std::to_string(number) + ": malformed JSON line");
    }
    try {
      contents.records.push_back(transcript_record_from_json(v));
    } catch (const ParseError& e) {
      throw ParseError(path + ":" + std::to_string(number) + ": " + e.what());
    }
  }
  return contents;
}

void write_transcript_line(std::ostream& out, const TranscriptRecord& record) {
  out << transcript_record_to_json(record).dump() << '\n';
}

std::map<std::string, std::vector<std::string>> complete_pairs(
    const std::vector<TranscriptRecord>& records, PromptKind prompt_kind, int num_samples) {
  std::map<std::string, std::map<int, std::string>> by_pair;
  std::set<std::string> broken;
  for (const auto& r : records) {
    if (r.prompt_kind != prompt_kind || r.sample_index < 0 || r.sample_index >= num_samples) {
      broken.insert(r.pair_id);
      continue;
    }
    if (!by_pair[r.pair_id].emplace(r.sample_index, r.text).second) broken.insert(r.pair_id);
  }
  std::map<std::string, std::vector<std::string>> out;
  for (auto& [pair_id, samples] : by_pair) {
    if (broken.contains(pair_id) || samples.size() != static_cast<std::size_t>(num_samples)) {
      continue;
    }
    auto& texts = out[pair_id];
    for (auto& [index, text] : samples) texts.push_back(std::move(text));
  }
  return out;
}

ojson triplet_to_json(const RawTriplet& t) {
  return {{"subject", t.subject},
          {"verb", t.verb},
          {"object", t.object},
          {"source", to_string(t.source)},
          {"sample_index", t.sample_index}};
}

ojson selection_to_json(const PairSelection& s) {
  ojson selected = ojson::array();
  for (const auto& st : s.selected) {
    ojson item = triplet_to_json(st.triplet);
    item["count"] = st.count;
    item["score"] = st.score;
    selected.push_back(std::move(item));
  }
  return {{"pair_id", s.pair_id},
          {"strategy", to_string(s.strategy)},
          {"k", s.k},
          {"num_samples", s.num_samples},
          {"selected", selected}};
}

PairSelection selection_from_json(const nlohmann::json& v) {
  try {
    PairSelection s;
    s.pair_id = v.at("pair_id").get<std::string>();
    s.strategy = parse_aggregation(v.at("strategy").get<std::string>());
    s.k = v.at("k").get<int>();
    s.num_samples = v.at("num_samples").get<std::size_t>();
    for (const auto& item : v.at("selected")) {
      ScoredTriplet st;
      st.triplet = {item.at("subject").get<std::string>(), item.at("verb").get<std::string>(),
                    item.at("object").get<std::string>(),
                    parse_triplet_source(item.at("source").get<std::string>()),
                    item.at("sample_index").get<int>()};
      st.count = item.at("count").get<std::size_t>();
      st.score = item.at("score").get<double>();
      s.selected.push_back(std::move(st));
    }
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed selection record: ") + e.what());
  }
}

std::vector<PairSelection> read_selections(const std::string& path) {
  std::vector<PairSelection> out;
  for_each_line(path, [&](const std::string& line, std::size_t number) {
    try {
      out.push_back(selection_from_json(parse_line(line)));
    } catch (const ParseError& e) {
      throw ParseError(path + ":" + std::to_string(number) + ": " + e.what());
    }
  });
  return out;
}

}  // namespace uhoi
