#include "dio/mutation.hpp"

#include <cstdio>
#include <map>
#include <optional>

#include "dio/error.hpp"
#include "dio/hashing.hpp"

namespace dio::detail {
extern const std::string_view kPromptTemplate;
}

namespace dio {

namespace {

using Sections = std::map<std::string, std::string, std::less<>>;

Sections parse_template(std::string_view text) {
  Sections out;
  std::string name;
  std::string body;
  auto flush = [&] {
    if (name.empty()) return;
    while (!body.empty() && body.back() == '\n') body.pop_back();
    out[name] = body;
  };
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    auto line = text.substr(pos, eol - pos);
    if (line.starts_with("@@ ")) {
      flush();
      name = std::string(line.substr(3));
      body.clear();
    } else {
      body.append(line);
      body.push_back('\n');
    }
    pos = eol + 1;
  }
  flush();
  return out;
}

const Sections& sections() {
  static const Sections s = parse_template(detail::kPromptTemplate);
  return s;
}

const std::string& section(std::string_view name) {
  auto it = sections().find(name);
  if (it == sections().end()) throw std::logic_error("prompt template lacks section " + std::string(name));
  return it->second;
}

std::string fill(std::string text, const std::map<std::string, std::string>& vars) {
  for (const auto& [key, value] : vars) {
    const auto token = "{{" + key + "}}";
    for (auto p = text.find(token); p != std::string::npos; p = text.find(token, p + value.size())) {
      text.replace(p, token.size(), value);
    }
  }
  return text;
}

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", x);
  return buf;
}

std::string score_text(const StageScore& s) {
  return "total " + num(s.total) + ", accuracy " + num(s.acc_curr) + ", complexity " + num(s.omega_comp) +
         ", copying " + num(s.omega_hard);
}

std::string call_text(std::string_view fn, const Value& input) {
  return std::string(fn) + "(" + literal_form(input) + ")";
}

std::string examples_text(std::string_view fn, const std::vector<Example>& examples,
                          const std::vector<std::size_t>* idx, const std::vector<std::size_t>* delta_idx) {
  std::string out;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    bool is_new = false;
    if (idx && delta_idx) {
      for (auto d : *delta_idx) is_new = is_new || d == (*idx)[i];
    }
    out += is_new ? "[NEW] " : "      ";
    out += call_text(fn, examples[i].input) + " -> " + literal_form(examples[i].output) + "\n";
  }
  if (!out.empty()) out.pop_back();
  return out;
}

std::string program_section(std::string_view name, const ProgramView& p) {
  return fill(section(name), {{"id", p.id}, {"score", score_text(p.score)}, {"source", p.source}});
}

std::string feedback_text(std::string_view fn, const std::vector<FeedbackBundle>& chain, bool with_artifacts) {
  std::string out;
  for (std::size_t k = 0; k < chain.size() && k < kFeedbackDepth; ++k) {
    const auto& b = chain[k];
    out += "Program " + b.candidate_id + (k == 0 ? " (the program to modify)" : " (ancestor " + std::to_string(k) + ")") +
           ": " + score_text(b.score) + "\n";
    if (!with_artifacts) continue;
    std::size_t shown = 0;
    for (const auto& a : b.artifacts) {
      if (shown++ == kMaxFailures) break;
      out += "  [" + std::string(to_string(a.origin)) + "] " + call_text(fn, a.input) + " expected " +
             literal_form(a.expected) + ", got " + describe(a.got) + "\n";
    }
    if (b.artifacts.empty()) out += "  no failures\n";
  }
  if (out.empty()) out = "No feedback yet.\n";
  out.pop_back();
  return out;
}

std::string phase_section(Phase p) {
  switch (p) {
    case Phase::Red:
      return section("phase_red");
    case Phase::Green:
      return section("phase_green");
    case Phase::Refactor:
      return section("phase_refactor");
  }
  return {};
}

}  // namespace

std::string_view to_string(Phase p) noexcept {
  switch (p) {
    case Phase::Red:
      return "Red";
    case Phase::Green:
      return "Green";
    case Phase::Refactor:
      return "Refactor";
  }
  return "?";
}

Phase select_phase(const StageScore& parent_score) noexcept {
  if (parent_score.acc_curr < 0.5) return Phase::Red;
  if (parent_score.acc_curr < 1.0) return Phase::Green;
  return Phase::Refactor;
}

std::string render_prompt(const PromptContext& ctx) {
  std::vector<std::string> parts;
  parts.push_back(fill(section("header"),
                       {{"function_name", ctx.function_name},
                        {"task_id", ctx.task_id},
                        {"stage", std::to_string(ctx.slice.index)},
                        {"stage_count", std::to_string(ctx.stage_count)},
                        {"examples", examples_text(ctx.function_name, ctx.slice.current, &ctx.slice.current_idx,
                                                   &ctx.slice.delta_idx)}}));
  parts.push_back(program_section("parent", ctx.parent));
  for (const auto& b : ctx.best_two) parts.push_back(program_section("best", b));
  parts.push_back(program_section("inspiration", ctx.inspiration));
  if (ctx.switches.feedback) {
    parts.push_back(fill(section("feedback"), {{"feedback", feedback_text(ctx.function_name, ctx.feedback_chain, true)}}));
  } else {
    parts.push_back(
        fill(section("scores_only"), {{"feedback", feedback_text(ctx.function_name, ctx.feedback_chain, false)}}));
  }
  if (ctx.switches.tpp) parts.push_back(fill(section("tpp"), {{"phase_guidance", phase_section(ctx.phase)}}));
  parts.push_back(section("anti_hardcoding"));
  parts.push_back(section("format"));

  std::string out;
  for (const auto& p : parts) out += p + "\n\n";
  out.pop_back();
  return out;
}

std::string render_proposal_prompt(std::string_view task_id, std::string_view function_name,
                                   std::string_view domain_text, const std::vector<Value>& existing,
                                   std::size_t count) {
  std::string used;
  for (const auto& v : existing) used += "  " + literal_form(v) + "\n";
  if (used.empty()) used = "  (none)\n";
  used.pop_back();
  return fill(section("propose"), {{"task_id", std::string(task_id)},
                                   {"function_name", std::string(function_name)},
                                   {"domain", std::string(domain_text)},
                                   {"existing", used},
                                   {"count", std::to_string(count)}}) +
         "\n";
}

std::string render_direct_prompt(std::string_view task_id, std::string_view function_name,
                                 const std::vector<Example>& examples) {
  return fill(section("direct"), {{"task_id", std::string(task_id)},
                                  {"function_name", std::string(function_name)},
                                  {"examples", examples_text(function_name, examples, nullptr, nullptr)}}) +
         "\n";
}

std::string_view prompt_template() noexcept { return detail::kPromptTemplate; }

const std::string& prompt_template_sha256() {
  static const std::string h = sha256_hex(detail::kPromptTemplate);
  return h;
}

namespace {

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    auto line = text.substr(pos, eol - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    pos = eol + 1;
  }
  return lines;
}

std::string_view trim_right(std::string_view s) {
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

std::string join(const std::vector<std::string_view>& lines, std::size_t from, std::size_t to) {
  std::string out;
  for (std::size_t i = from; i < to; ++i) {
    if (i > from) out.push_back('\n');
    out.append(lines[i]);
  }
  return out;
}

bool is_fence(std::string_view line) {
  while (!line.empty() && line.front() == ' ') line.remove_prefix(1);
  return line.starts_with("```");
}

std::vector<std::string> fenced_blocks(const std::vector<std::string_view>& lines) {
  std::vector<std::string> blocks;
  std::optional<std::size_t> open;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (!is_fence(lines[i])) continue;
    if (open) {
      blocks.push_back(join(lines, *open + 1, i));
      open.reset();
    } else {
      open = i;
    }
  }
  return blocks;
}

}  // namespace

ParsedResponse parse_response(std::string_view text) {
  const auto lines = split_lines(text);
  std::vector<DiffBlock> blocks;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (trim_right(lines[i]) != "<<<<<<< SEARCH") continue;
    std::size_t sep = i + 1;
    while (sep < lines.size() && trim_right(lines[sep]) != "=======") ++sep;
    std::size_t end = sep + 1;
    while (end < lines.size() && trim_right(lines[end]) != ">>>>>>> REPLACE") ++end;
    if (sep >= lines.size() || end >= lines.size()) break;
    DiffBlock b{join(lines, i + 1, sep), join(lines, sep + 1, end)};
    if (!b.search.empty() && b.search != b.replace) blocks.push_back(std::move(b));
    i = end;
  }
  if (!blocks.empty()) return blocks;
  auto fenced = fenced_blocks(lines);
  if (fenced.size() == 1) return FullRewrite{fenced.front() + "\n"};
  if (fenced.empty()) return ParseFailure{"no SEARCH/REPLACE block and no fenced program"};
  return ParseFailure{"no SEARCH/REPLACE block and " + std::to_string(fenced.size()) + " fenced blocks"};
}

std::optional<std::string> first_fenced_block(std::string_view text) {
  auto fenced = fenced_blocks(split_lines(text));
  if (fenced.empty()) return std::nullopt;
  return fenced.front();
}

std::string apply_diffs(std::string source, const std::vector<DiffBlock>& blocks) {
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const auto& b = blocks[i];
    const auto first = b.search.empty() ? std::string::npos : source.find(b.search);
    if (first == std::string::npos) throw DiffApplyError(DiffApplyError::Kind::NoMatch, i);
    if (source.find(b.search, first + 1) != std::string::npos) {
      throw DiffApplyError(DiffApplyError::Kind::AmbiguousMatch, i);
    }
    source.replace(first, b.search.size(), b.replace);
  }
  return source;
}

}  // namespace dio
