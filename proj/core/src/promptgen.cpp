// Copyright 2026 The avtime Authors
// SPDX-License-Identifier: Apache-2.0

#include "avtime/promptgen.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <regex>
#include <sstream>

#include "avtime/error.hpp"
#include "jsonl.hpp"

namespace avtime {
namespace {

using detail::json;

ResponseTemplate label_template(std::string text) {
  const Arity arity = text.find(kEventListPlaceholder) != std::string::npos ? Arity::multi
                                                                            : Arity::single;
  return {std::move(text), arity};
}

std::string replace_first(std::string text, std::string_view from, std::string_view to) {
  if (const auto pos = text.find(from); pos != std::string::npos) {
    text.replace(pos, from.size(), to);
  }
  return text;
}

const std::regex& tau_regex() {
  static const std::regex re(R"(\bfrom\s+\d+\s+to\s+\d+)", std::regex::icase);
  return re;
}

template <typename T>
const T& pick(const std::vector<T>& items, Rng& rng) {
  return items[rng.uniform_index(items.size())];
}

}  // namespace

const TemplateBank& default_template_bank() {
  static const TemplateBank bank = [] {
    TemplateBank b;
    b.audio_caption_queries = {
        "Render a clear and concise summary of the audio.",
        "Write a terse but informative summary of the audio clip.",
        "Present a compact description of the audio's key features.",
        "What is in the audio?",
        "Describe the audio concisely.",
        "Share a concise interpretation of the provided audio.",
        "Give a brief description of the audio.",
        "Provide a brief description of the given audio.",
        "Summarize the auditory content of the audio.",
    };
    b.cba_queries = {
        "Tell me about the visual and audio events <tau> in the video.",
        "What was going on visually and audibly <tau> in the video?",
        "Please recount what occurred, including both video and audio, <tau> in the video.",
        "Could you tell me what happened, in terms of both imagery and sound, <tau> in the video?",
        "Provide details about the visual scenes and audio events <tau> in the video.",
        "Can you describe what occurred, both visually and audibly, <tau> in the video?",
        "Explain what happened, considering both video and audio, <tau> in the video.",
    };
    b.taq_queries = {
        "What happens in the video, and when does it happen?",
        "Describe an audio-visual event in the video and tell me when it occurs.",
        "Which event can be seen and heard in the video, and at what time?",
    };
    for (const char* t : {
             "There is the sound of <event>.",
             "I can hear the sound of <event>.",
             "Listening to the sound of <event>.",
             "Resonating is the sound of <event>.",
             "Filling the air is the sound of <event>.",
             "There are the sounds of <event>_1, <event>_2, ...",
             "I can hear the sounds of <event>_1, <event>_2, ...",
             "Listening to the sounds of <event>_1, <event>_2, ...",
             "Surrounding me are the sounds of <event>_1, <event>_2, ...",
             "Echoing are the sounds of <event>_1, <event>_2, ...",
         }) {
      b.audioset_prefix.push_back(label_template(t));
    }
    for (const char* t : {
             "<event> can be heard.",
             "<event> is audible.",
             "<event> resounds.",
             "<event>_1, <event>_2, ... can be heard.",
             "<event>_1, <event>_2, ... are audible.",
             "<event>_1, <event>_2, ... resound.",
             "<event> resounds.",
             "<event> permeates the air.",
             "<event> is noticeable.",
             "<event>_1, <event>_2, ... resound.",
             "<event>_1, <event>_2, ... permeate the air.",
             "<event>_1, <event>_2, ... are noticeable.",
         }) {
      b.audioset_suffix.push_back(label_template(t));
    }
    return b;
  }();
  return bank;
}

void validate_bank(const TemplateBank& bank) {
  if (bank.audio_caption_queries.empty() || bank.cba_queries.empty() || bank.taq_queries.empty() ||
      bank.audioset_prefix.empty() || bank.audioset_suffix.empty()) {
    throw ValidationError("template bank: every template list must be non-empty");
  }
  for (const auto& q : bank.cba_queries) {
    if (q.find(kTauPlaceholder) == std::string::npos) {
      throw ValidationError("template bank: cba query lacks <tau>: " + q);
    }
  }
  for (const auto& q : bank.taq_queries) {
    if (contains_tau(q)) throw ValidationError("template bank: taq query mentions a time: " + q);
  }
  for (const auto* list : {&bank.audioset_prefix, &bank.audioset_suffix}) {
    for (const auto& t : *list) {
      const bool has_list = t.text.find(kEventListPlaceholder) != std::string::npos;
      const bool has_single = t.text.find(kEventPlaceholder) != std::string::npos;
      if ((t.arity == Arity::multi && !has_list) || (t.arity == Arity::single && (has_list || !has_single))) {
        throw ValidationError("template bank: label template has the wrong placeholder: " + t.text);
      }
    }
  }
}

TemplateBank load_template_bank(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  json doc = json::parse(in, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) {
    throw ValidationError(path.string() + ": malformed template bank");
  }
  const std::string ctx = path.string();
  // Lists omitted from the file fall back to the built-in bank.
  TemplateBank bank = default_template_bank();
  auto strings = [&](const char* key, std::vector<std::string>& dst) {
    if (doc.contains(key)) dst = detail::require<std::vector<std::string>>(doc, key, ctx);
  };
  strings("audio_caption_queries", bank.audio_caption_queries);
  strings("cba_queries", bank.cba_queries);
  strings("taq_queries", bank.taq_queries);
  auto templates = [&](const char* key, std::vector<ResponseTemplate>& dst) {
    if (!doc.contains(key)) return;
    dst.clear();
    for (auto& t : detail::require<std::vector<std::string>>(doc, key, ctx)) {
      dst.push_back(label_template(std::move(t)));
    }
  };
  templates("audioset_prefix", bank.audioset_prefix);
  templates("audioset_suffix", bank.audioset_suffix);
  validate_bank(bank);
  return bank;
}

void write_template_bank(const TemplateBank& bank, const std::filesystem::path& path) {
  json doc = json::object();
  doc["audio_caption_queries"] = bank.audio_caption_queries;
  doc["cba_queries"] = bank.cba_queries;
  doc["taq_queries"] = bank.taq_queries;
  auto texts = [](const std::vector<ResponseTemplate>& list) {
    std::vector<std::string> out;
    for (const auto& t : list) out.push_back(t.text);
    return out;
  };
  doc["audioset_prefix"] = texts(bank.audioset_prefix);
  doc["audioset_suffix"] = texts(bank.audioset_suffix);
  auto out = detail::open_for_write(path);
  out << doc.dump(2) << '\n';
  detail::finish_write(out, path);
}

std::string tau_text(int start, int end) {
  return "from " + std::to_string(start) + " to " + std::to_string(end);
}

Tau format_interval(double start_s, double end_s, double total_duration_s, std::size_t T) {
  if (T < 1) throw ValidationError("format_interval: T must be at least 1");
  if (!(total_duration_s > 0.0) || !std::isfinite(total_duration_s)) {
    throw ValidationError("format_interval: total duration must be positive");
  }
  if (!(start_s >= 0.0 && start_s <= end_s && end_s <= total_duration_s)) {
    throw ValidationError("format_interval: need 0 <= start <= end <= total");
  }
  const double tokens = static_cast<double>(T);
  const int last = static_cast<int>(T) - 1;
  // Nearest token boundary on each side; the end token is inclusive.
  const auto boundary = [&](double x) {
    return static_cast<int>(std::floor(x * tokens / total_duration_s + 0.5));
  };
  Tau tau;
  tau.start = std::clamp(boundary(start_s), 0, last);
  tau.end = std::clamp(boundary(end_s) - 1, tau.start, last);
  tau.text = tau_text(tau.start, tau.end);
  return tau;
}

std::string_view to_string(PairKind kind) {
  switch (kind) {
    case PairKind::tq_tar: return "TQ_TAR";
    case PairKind::taq_tr: return "TAQ_TR";
    case PairKind::audio_caption: return "audio_caption";
    case PairKind::audioset_label: return "audioset_label";
    case PairKind::plain: return "plain";
  }
  return "plain";
}

PairKind parse_pair_kind(std::string_view text) {
  for (PairKind k : {PairKind::tq_tar, PairKind::taq_tr, PairKind::audio_caption,
                     PairKind::audioset_label, PairKind::plain}) {
    if (to_string(k) == text) return k;
  }
  throw ValidationError("unknown pair kind \"" + std::string(text) + "\"");
}

bool contains_tau(std::string_view text) {
  return std::regex_search(text.begin(), text.end(), tau_regex());
}

std::string render_cba_query(std::string_view query_template, std::string_view tau) {
  return replace_first(std::string(query_template), kTauPlaceholder, tau);
}

std::string render_label_response(const ResponseTemplate& tmpl,
                                  std::span<const std::string> labels) {
  if (labels.empty()) throw ValidationError("label template needs at least one label");
  if (tmpl.arity == Arity::single) {
    if (labels.size() != 1) throw ValidationError("single-event template given several labels");
    return replace_first(tmpl.text, kEventPlaceholder, labels.front());
  }
  std::string joined;
  for (const auto& label : labels) {
    if (!joined.empty()) joined += ", ";
    joined += label;
  }
  return replace_first(tmpl.text, kEventListPlaceholder, joined);
}

std::string render_taq_response(std::string_view caption, std::string_view tau) {
  std::string c(caption);
  while (!c.empty() && (c.back() == '.' || c.back() == '!' || c.back() == '?' ||
                        std::isspace(static_cast<unsigned char>(c.back())))) {
    c.pop_back();
  }
  return c + ", " + std::string(tau) + ".";
}

PairGenResult gen_cba_pairs(const PseudoUntrimmedVideo& video, const TemplateBank& bank, Rng& rng,
                            std::size_t T) {
  PairGenResult out;
  for (const auto& ann : video.annotations) {
    if (ann.caption.empty() || contains_tau(ann.caption)) {
      ++out.skipped_annotations;
      continue;
    }
    const Tau tau = format_interval(ann.start_s, ann.end_s, video.total_duration_s, T);

    QAPair tq;
    tq.video_id = video.id;
    tq.kind = PairKind::tq_tar;
    tq.query = render_cba_query(pick(bank.cba_queries, rng), tau.text);
    tq.response = ann.caption;
    tq.tau = std::pair{tau.start, tau.end};
    out.pairs.push_back(std::move(tq));

    QAPair ta;
    ta.video_id = video.id;
    ta.kind = PairKind::taq_tr;
    ta.query = pick(bank.taq_queries, rng);
    ta.response = render_taq_response(ann.caption, tau.text);
    ta.tau = std::pair{tau.start, tau.end};
    out.pairs.push_back(std::move(ta));
  }
  return out;
}

QAPair gen_audio_pairs(const TrimmedClip& clip, const TemplateBank& bank, Rng& rng) {
  const bool has_labels = clip.labels && !clip.labels->empty();
  if (clip.caption.empty() && !has_labels) {
    throw ValidationError("clip \"" + clip.id + "\" has neither a caption nor labels");
  }
  QAPair pair;
  pair.video_id = clip.id;
  pair.query = pick(bank.audio_caption_queries, rng);
  if (!clip.caption.empty()) {
    pair.kind = PairKind::audio_caption;
    pair.response = clip.caption;
    return pair;
  }
  const Arity want = clip.labels->size() == 1 ? Arity::single : Arity::multi;
  std::vector<const ResponseTemplate*> candidates;
  for (const auto* list : {&bank.audioset_prefix, &bank.audioset_suffix}) {
    for (const auto& t : *list)
      if (t.arity == want) candidates.push_back(&t);
  }
  if (candidates.empty()) throw ValidationError("template bank has no template for this label count");
  pair.kind = PairKind::audioset_label;
  pair.response = render_label_response(*candidates[rng.uniform_index(candidates.size())],
                                        *clip.labels);
  return pair;
}

void validate_pair(const QAPair& pair, std::size_t T) {
  const bool timed = pair.kind == PairKind::tq_tar || pair.kind == PairKind::taq_tr;
  if (!timed) return;
  if (!pair.tau) throw ValidationError("time-referenced pair without tau");
  const auto [s, e] = *pair.tau;
  if (s < 0 || s > e || e > static_cast<int>(T) - 1) {
    throw ValidationError("tau (" + std::to_string(s) + ", " + std::to_string(e) +
                          ") outside [0, T-1]");
  }
  const std::string& timed_text = pair.kind == PairKind::tq_tar ? pair.query : pair.response;
  const std::string& plain_text = pair.kind == PairKind::tq_tar ? pair.response : pair.query;
  if (timed_text.find(tau_text(s, e)) == std::string::npos) {
    throw ValidationError("pair text does not carry its tau expression");
  }
  if (contains_tau(plain_text)) {
    throw ValidationError(std::string(to_string(pair.kind)) + " pair has tau on the wrong side");
  }
}

std::string pair_to_json_line(const QAPair& pair) {
  json rec = json::object();
  rec["video_id"] = pair.video_id;
  rec["kind"] = to_string(pair.kind);
  rec["query"] = pair.query;
  rec["response"] = pair.response;
  if (pair.tau) rec["tau"] = {pair.tau->first, pair.tau->second};
  return detail::dump_line(rec);
}

QAPair pair_from_json_line(std::string_view line) {
  json rec = json::parse(line, nullptr, false);
  if (rec.is_discarded() || !rec.is_object()) throw ValidationError("malformed pair record");
  const std::string ctx = "pair record";
  QAPair pair;
  pair.video_id = detail::require<std::string>(rec, "video_id", ctx);
  pair.kind = parse_pair_kind(detail::require<std::string>(rec, "kind", ctx));
  pair.query = detail::require<std::string>(rec, "query", ctx);
  pair.response = detail::require<std::string>(rec, "response", ctx);
  if (rec.contains("tau") && !rec["tau"].is_null()) {
    const auto tau = detail::require<std::vector<int>>(rec, "tau", ctx);
    if (tau.size() != 2) throw ValidationError("pair record: tau must have two integers");
    pair.tau = std::pair{tau[0], tau[1]};
  }
  return pair;
}

void write_pairs(std::span<const QAPair> pairs, const std::filesystem::path& path) {
  auto out = detail::open_for_write(path);
  for (const auto& pair : pairs) out << pair_to_json_line(pair) << '\n';
  detail::finish_write(out, path);
}

}  // namespace avtime
