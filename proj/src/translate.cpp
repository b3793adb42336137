#include "fragkit/translate.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "fragkit/backend.hpp"
#include "fragkit/errors.hpp"
#include "fragkit/parallel.hpp"

namespace fragkit {
namespace {

constexpr std::string_view kMarkerPrefix = "// @fragment ";

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string(), "cannot open");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError(path.string(), "read failed");
  return ss.str();
}

void write_text(const std::filesystem::path& path, std::string_view text) {
  std::error_code ec;
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw IoError(path.parent_path().string(), ec.message());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path.string(), "cannot open for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw IoError(path.string(), "write failed");
}

std::string context_entry(const std::string& id, ContextRepresentation rep,
                          std::string_view body) {
  std::string out = "// " + id;
  if (rep == ContextRepresentation::signature_only) out += " (signature only)";
  out += "\n";
  out += body;
  out += "\n";
  return out;
}

std::string stub(TranslationStatus status, const std::string& id,
                 std::string_view signature) {
  std::string out = "/* ";
  out += kStubMarker;
  out += " ";
  out += to_string(status);
  out += " ";
  out += id;
  out += "\n";
  // keep the comment closed
  for (std::size_t i = 0; i < signature.size(); ++i) {
    out.push_back(signature[i]);
    if (signature[i] == '*' && i + 1 < signature.size() && signature[i + 1] == '/') {
      out.push_back('\\');
    }
  }
  if (!signature.empty()) out += "\n";
  out += "*/";
  return out;
}

std::string_view rtrim(std::string_view s) {
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::string fixed2(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

}  // namespace

std::string_view to_string(TranslationMode mode) {
  return mode == TranslationMode::whole_file ? "whole_file" : "method_decomposition";
}

std::optional<TranslationMode> parse_translation_mode(std::string_view text) {
  if (text == "whole_file") return TranslationMode::whole_file;
  if (text == "method_decomposition") return TranslationMode::method_decomposition;
  return std::nullopt;
}

std::string_view to_string(TranslationStatus status) {
  switch (status) {
    case TranslationStatus::translated:
      return "translated";
    case TranslationStatus::out_of_context:
      return "out_of_context";
    case TranslationStatus::backend_error:
      return "backend_error";
  }
  return "?";
}

TranslationPlan make_plan(const SccDag& dag, std::string source_lang,
                          std::string target_lang) {
  TranslationPlan plan;
  plan.mode = TranslationMode::method_decomposition;
  plan.batches = dag.batches();
  plan.source_lang = std::move(source_lang);
  plan.target_lang = std::move(target_lang);
  return plan;
}

TranslationPlan make_whole_file_plan(std::span<const ParsedFile> files,
                                     std::string source_lang,
                                     std::string target_lang) {
  TranslationPlan plan;
  plan.mode = TranslationMode::whole_file;
  for (const auto& f : files) plan.batches.push_back({f.file.rel_path});
  std::sort(plan.batches.begin(), plan.batches.end());
  plan.source_lang = std::move(source_lang);
  plan.target_lang = std::move(target_lang);
  return plan;
}

PromptTemplate PromptTemplate::default_template() {
  return PromptTemplate{
      "Translate the following {SOURCE_LANG} code to {TARGET_LANG}. "
      "Reply with the translated code only.\n"
      "\n"
      "Already translated code it depends on:\n"
      "{CONTEXT}\n"
      "{SOURCE_LANG} code:\n"
      "{SOURCE}\n"};
}

PromptTemplate PromptTemplate::load(const std::filesystem::path& path) {
  return PromptTemplate{read_text(path)};
}

std::string PromptTemplate::render(std::string_view source_lang,
                                   std::string_view target_lang,
                                   std::string_view context,
                                   std::string_view source) const {
  const std::pair<std::string_view, std::string_view> holes[] = {
      {"{SOURCE_LANG}", source_lang},
      {"{TARGET_LANG}", target_lang},
      {"{CONTEXT}", context},
      {"{SOURCE}", source},
  };
  std::string out;
  out.reserve(text.size() + context.size() + source.size());
  std::string_view rest = text;
  while (!rest.empty()) {
    const auto brace = rest.find('{');
    if (brace == std::string_view::npos) {
      out += rest;
      break;
    }
    out += rest.substr(0, brace);
    rest.remove_prefix(brace);
    bool matched = false;
    for (const auto& [hole, value] : holes) {
      if (rest.starts_with(hole)) {
        out += value;
        rest.remove_prefix(hole.size());
        matched = true;
        break;
      }
    }
    if (!matched) {
      out.push_back('{');
      rest.remove_prefix(1);
    }
  }
  return out;
}

TranslationUnits::TranslationUnits(std::span<const ParsedFile> files)
    : files_(files) {
  for (const auto& pf : files) {
    units_[pf.file.rel_path] =
        Unit{pf.file.rel_path, pf.file.rel_path, pf.file.content, {}, nullptr};
    for (const auto& f : pf.fragments) {
      units_[f.id] = Unit{f.id, pf.file.rel_path,
                          text_with_placeholders(pf.file.content, f, pf.fragments),
                          f.signature_text, &f};
    }
  }
}

const TranslationUnits::Unit& TranslationUnits::at(const std::string& id) const {
  const auto it = units_.find(id);
  if (it == units_.end()) throw UnknownFragmentId(id);
  return it->second;
}

std::size_t auto_reserved_output(std::size_t window, std::size_t largest_source) {
  return std::min(window / 2, largest_source * 2);
}

std::string batch_marker(std::string_view fragment_id) {
  return std::string(kMarkerPrefix) + std::string(fragment_id);
}

std::optional<std::map<std::string, std::string>> split_batch_output(
    std::string_view output, const std::vector<std::string>& members) {
  const std::set<std::string> wanted(members.begin(), members.end());
  std::map<std::string, std::vector<std::string_view>> lines;
  const std::string* current = nullptr;
  std::size_t pos = 0;
  while (pos < output.size()) {
    auto nl = output.find('\n', pos);
    if (nl == std::string_view::npos) nl = output.size();
    const auto line = output.substr(pos, nl - pos);
    pos = nl + 1;

    const auto trimmed = rtrim(line);
    const auto at = trimmed.rfind(kMarkerPrefix);
    if (at != std::string_view::npos) {
      const auto it = wanted.find(std::string(trimmed.substr(at + kMarkerPrefix.size())));
      if (it != wanted.end() && !lines.count(*it)) {
        current = &*it;
        lines[*it];
        continue;
      }
    }
    if (current) lines[*current].push_back(line);
  }
  if (lines.size() != wanted.size()) return std::nullopt;
  std::map<std::string, std::string> out;
  for (const auto& [id, ls] : lines) {
    std::string text;
    for (std::size_t i = 0; i < ls.size(); ++i) {
      if (i) text.push_back('\n');
      text += ls[i];
    }
    out[id] = std::move(text);
  }
  return out;
}

PromptPacket pack_prompt(const std::vector<std::string>& batch,
                         const TranslationUnits& units,
                         const std::map<std::string, TranslationResult>& completed,
                         const CallGraph& graph, const PackOptions& options,
                         const TokenCounter& counter) {
  PromptPacket p;
  p.fragment_ids = batch;

  std::size_t largest = 0;
  for (const auto& id : batch) {
    largest = std::max(largest, counter.count(units.at(id).source_text));
  }
  if (batch.size() == 1) {
    p.source_text = units.at(batch.front()).source_text;
  } else {
    for (const auto& id : batch) {
      p.source_text += batch_marker(id) + "\n" + units.at(id).source_text + "\n";
    }
  }

  const auto& tmpl = options.prompt;
  const auto& sl = options.source_lang;
  const auto& tl = options.target_lang;
  p.instruction_text = tmpl.render(sl, tl, "", "");
  p.budget.window = options.window;
  p.budget.reserved_output =
      options.reserved_output.value_or(auto_reserved_output(options.window, largest));
  p.budget.prompt_overhead = counter.count_uncached(p.instruction_text);

  const auto limit = options.window >= p.budget.reserved_output
                         ? options.window - p.budget.reserved_output
                         : 0;
  p.prompt_text = tmpl.render(sl, tl, "", p.source_text);
  p.total_input_tokens = counter.count_uncached(p.prompt_text);
  if (p.total_input_tokens > limit) {
    throw OutOfContext(p.total_input_tokens, p.budget.reserved_output,
                       options.window);
  }

  const std::set<std::string> members(batch.begin(), batch.end());
  std::map<std::string, std::size_t> sites;
  for (const auto& m : members) {
    for (auto it = graph.edges.lower_bound({m, std::string()});
         it != graph.edges.end() && it->first.first == m; ++it) {
      if (!members.count(it->first.second)) sites[it->first.second] += it->second;
    }
  }
  std::vector<std::pair<std::string, std::size_t>> candidates(sites.begin(),
                                                              sites.end());
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });

  std::string context;
  for (const auto& [callee, _] : candidates) {
    const auto done = completed.find(callee);
    if (done == completed.end()) {
      throw std::logic_error("callee " + callee + " packed before its result");
    }
    auto try_add = [&](ContextRepresentation rep, std::string_view body) {
      auto extended = context + context_entry(callee, rep, body);
      auto prompt = tmpl.render(sl, tl, extended, p.source_text);
      const auto n = counter.count_uncached(prompt);
      if (n > limit) return false;
      context = std::move(extended);
      p.prompt_text = std::move(prompt);
      p.total_input_tokens = n;
      p.dependency_context.push_back({callee, rep});
      return true;
    };
    if (done->second.status == TranslationStatus::translated &&
        try_add(ContextRepresentation::translated_body, done->second.output_text)) {
      continue;
    }
    try_add(ContextRepresentation::signature_only, units.at(callee).signature_text);
  }
  return p;
}

TranslationRun run_translation(const TranslationPlan& plan,
                               const TranslationUnits& units,
                               const CallGraph& graph, Backend& backend,
                               const RunOptions& options,
                               const TokenCounter& counter) {
  PackOptions pack = options.pack;
  pack.source_lang = plan.source_lang;
  pack.target_lang = plan.target_lang;

  std::atomic<std::size_t> violations{0};
  const std::map<std::string, TranslationResult> no_results;

  auto run_batch = [&](const std::vector<std::string>& batch,
                       const std::map<std::string, TranslationResult>& completed) {
    std::vector<TranslationResult> out;
    for (const auto& id : batch) {
      out.push_back(TranslationResult{id, units.at(id).file,
                                      TranslationStatus::translated, {}, 0, {}});
    }
    auto fail = [&](TranslationStatus status, std::size_t tokens,
                    const std::string& why) {
      for (auto& r : out) {
        r.status = status;
        r.output_text.clear();
        r.input_tokens = tokens;
        r.detail = why;
      }
    };

    PromptPacket packet;
    try {
      packet = pack_prompt(batch, units, completed, graph, pack, counter);
    } catch (const OutOfContext& e) {
      fail(TranslationStatus::out_of_context, e.mandatory_tokens(), e.what());
      return out;
    }
    if (packet.total_input_tokens + packet.budget.reserved_output > packet.budget.window) {
      ++violations;
    }
    if (options.on_packet) options.on_packet(packet);
    for (auto& r : out) r.input_tokens = packet.total_input_tokens;

    try {
      const auto reply = backend_call(backend, packet);
      std::map<std::string, std::string> texts;
      if (batch.size() == 1) {
        texts[batch.front()] = reply;
      } else {
        auto split = split_batch_output(reply, batch);
        if (!split) throw MalformedResponse("reply is missing fragment markers");
        texts = std::move(*split);
      }
      for (auto& r : out) {
        r.output_text = texts[r.id];
        if (r.output_text.empty()) {
          r.status = TranslationStatus::backend_error;
          r.detail = "empty translation";
        }
      }
    } catch (const BackendError& e) {
      if (options.fail_fast) throw;
      fail(TranslationStatus::backend_error, packet.total_input_tokens, e.what());
    }
    return out;
  };

  TranslationRun run;
  run.summary.mode = plan.mode;
  run.summary.n_source_files = units.files().size();

  if (plan.mode == TranslationMode::whole_file) {
    std::vector<std::vector<TranslationResult>> slots(plan.batches.size());
    parallel_for(plan.batches.size(), options.max_in_flight, [&](std::size_t i) {
      slots[i] = run_batch(plan.batches[i], no_results);
    });
    for (auto& s : slots) {
      for (auto& r : s) run.results.push_back(std::move(r));
    }
  } else {
    std::map<std::string, TranslationResult> completed;
    for (const auto& batch : plan.batches) {
      for (auto& r : run_batch(batch, completed)) {
        completed[r.id] = r;
        run.results.push_back(std::move(r));
      }
    }
  }

  auto& s = run.summary;
  s.n_inputs = run.results.size();
  double pct_sum = 0;
  for (const auto& r : run.results) {
    if (r.status == TranslationStatus::out_of_context) ++s.n_out_of_context;
    if (r.status == TranslationStatus::backend_error) ++s.n_backend_error;
    pct_sum += static_cast<double>(r.input_tokens) * 100.0 /
               static_cast<double>(pack.window);
  }
  if (s.n_inputs > 0) s.pct_context_occupied = pct_sum / static_cast<double>(s.n_inputs);
  s.budget_violations = violations;
  return run;
}

std::string assemble_file(const ParsedFile& file,
                          const std::map<std::string, const TranslationResult*>& by_id,
                          TranslationMode mode) {
  const auto& rel = file.file.rel_path;
  std::string out = "// fragkit output for " + rel + "\n";

  if (mode == TranslationMode::whole_file) {
    const auto it = by_id.find(rel);
    if (it != by_id.end() && it->second->status == TranslationStatus::translated) {
      out += it->second->output_text;
    } else {
      const auto status = it != by_id.end() ? it->second->status
                                            : TranslationStatus::backend_error;
      out += stub(status, rel, "");
    }
    if (out.back() != '\n') out += "\n";
    return out;
  }

  if (file.fragments.empty()) {
    out = "// fragkit: " + rel + " has no method fragments; copied verbatim\n";
    return out + file.file.content;
  }

  std::map<std::string, const MethodFragment*> frags;
  for (const auto& f : file.fragments) frags[f.id] = &f;

  std::function<std::string(const SkeletonSegment&)> render =
      [&](const SkeletonSegment& seg) -> std::string {
    const auto it = by_id.find(seg.fragment_id);
    std::string text;
    if (it != by_id.end() && it->second->status == TranslationStatus::translated) {
      text = it->second->output_text;
      for (const auto& child : seg.children) {
        if (!child.is_fragment()) continue;
        const auto ph = placeholder_for(child.fragment_id);
        const auto body = render(child);
        if (const auto at = text.find(ph); at != std::string::npos) {
          text.replace(at, ph.size(), body);
        } else {
          text += "\n" + body;
        }
      }
      return text;
    }
    const auto status =
        it != by_id.end() ? it->second->status : TranslationStatus::backend_error;
    const auto fit = frags.find(seg.fragment_id);
    text = stub(status, seg.fragment_id,
                fit != frags.end() ? fit->second->signature_text : std::string());
    for (const auto& child : seg.children) {
      if (child.is_fragment()) text += "\n" + render(child);
    }
    return text;
  };

  for (const auto& seg : file.skeleton.segments) {
    out += seg.is_fragment() ? render(seg) : seg.literal;
  }
  return out;
}

nlohmann::ordered_json assemble_outputs(const TranslationRun& run,
                                        const TranslationUnits& units,
                                        const std::filesystem::path& target_dir) {
  std::map<std::string, const TranslationResult*> by_id;
  for (const auto& r : run.results) by_id[r.id] = &r;

  for (const auto& pf : units.files()) {
    write_text(target_dir / pf.file.rel_path,
               assemble_file(pf, by_id, run.summary.mode));
  }

  nlohmann::ordered_json manifest;
  manifest["mode"] = std::string(to_string(run.summary.mode));
  auto inputs = nlohmann::ordered_json::array();
  for (const auto& r : run.results) {
    inputs.push_back(nlohmann::ordered_json{
        {"id", r.id},
        {"status", std::string(to_string(r.status))},
        {"input_tokens", r.input_tokens},
        {"output_path", r.file},
    });
  }
  manifest["inputs"] = std::move(inputs);
  const auto& s = run.summary;
  manifest["summary"] = nlohmann::ordered_json{
      {"n_source_files", s.n_source_files},
      {"n_inputs", s.n_inputs},
      {"n_out_of_context", s.n_out_of_context},
      {"n_backend_error", s.n_backend_error},
      {"pct_context_occupied", s.pct_context_occupied},
  };
  write_text(target_dir / "manifest.json", manifest.dump(2) + "\n");
  return manifest;
}

std::string render_run_summaries(const std::vector<RunSummary>& rows) {
  std::string out =
      "| Decomposition Technique | # Source Files | # Out-of-Context Inputs | % Context Occupied |\n"
      "|---|---:|---:|---:|\n";
  for (const auto& r : rows) {
    out += "| ";
    out += r.mode == TranslationMode::whole_file ? "No Decomposition"
                                                 : "Method Decomposition";
    out += " | " + std::to_string(r.n_source_files) + " | " +
           std::to_string(r.n_out_of_context) + " | " +
           fixed2(r.pct_context_occupied) + "% |\n";
  }
  return out;
}

}  // namespace fragkit
