#include <optional>

#include "http.hpp"
#include "ookgate/error.hpp"

namespace ookgate {

namespace {

struct PromptTemplate {
  std::string_view id;
  std::string_view system;  // contains {Examples}
  std::string_view user;    // contains {Context}
  std::string_view examples;
};

constexpr std::string_view kTextbookSystem =
    "You are a professor setting up quiz questions for medical students.\n"
    "The questions should be based only on context from textbook and should be diverse in "
    "nature.\n"
    "Below are some sample questions.\n"
    "\n"
    "{Examples}\n";

constexpr std::string_view kTextbookUser =
    "Below is a chunk of context from textbook.\n"
    "\n"
    "---\n"
    "{Context}\n"
    "---\n"
    "\n"
    "Given the context information, please generate similar question following the json "
    "format.\n";

constexpr std::string_view kTextbookExamples = R"ex({
"question": "A 45-year-old woman with metastatic breast cancer presents with acute-onset dyspnea and chest pain. She has been receiving paclitaxel chemotherapy for the past 3 months. Chest X-ray reveals pleural effusion. Which of the following mechanisms best explains the mode of action of paclitaxel?",
"options": {
"A": "Inhibition of proteasome",
"B": "Hyperstabilization of microtubules",
"C": "Generation of free radicals",
"D": "Cross-linking of DNA"
},
"answer": "B"
}

{
"question": "A 25-year-old woman presents to her gynecologist for birth control counseling. She has no significant past medical history. She expresses interest in using an intrauterine device (IUD) as her preferred method. Her vital signs are: blood pressure 120/80 mm Hg, pulse 70/min, and respiratory rate 16/min. She is afebrile. Physical examination is unremarkable. Which of the following conditions would be a contraindication to the placement of a levonorgestrel-releasing IUD in this patient?",
"options": {
"A": "A history of severe migraines with aura",
"B": "Known uterine fibroids",
"C": "History of endometrial cancer",
"D": "Active or recent history of sexually transmitted infection (STI)"
},
"answer": "C"
})ex";

constexpr std::string_view kPubmedSystem =
    "You are a professor setting up quiz questions for medical students.\n"
    "The questions should be based only on context from research abstracts and should be "
    "diverse in nature.\n"
    "Below are some sample questions.\n"
    "\n"
    "{Examples}\n";

constexpr std::string_view kPubmedUser =
    "Below is a chunk of context from a research abstract.\n"
    "\n"
    "---\n"
    "{Context}\n"
    "---\n"
    "\n"
    "Given the context information, please generate similar question following the json "
    "format.\n";

constexpr std::string_view kPubmedExamples = R"ex({
"question": "Is the use of magnetic resonance imaging (MRI) superior to computed tomography (CT) in diagnosing soft tissue injuries?",
"options": {"A": "yes", "B": "no", "C": "maybe"},
"answer": "B"
}

{
"question": "Does the administration of statins correlate with a reduced risk of cardiovascular events in diabetic patients?",
"options": {"A": "yes", "B": "no", "C": "maybe"},
"answer": "A"
}

{
"question": "Can telemedicine effectively replace in-person consultations for routine follow-up appointments in managing chronic diseases?",
"options": {"A": "yes", "B": "no", "C": "maybe"},
"answer": "C"
})ex";

constexpr PromptTemplate kTemplates[] = {
    {"textbooks", kTextbookSystem, kTextbookUser, kTextbookExamples},
    {"pubmed", kPubmedSystem, kPubmedUser, kPubmedExamples},
};

const PromptTemplate& find_template(std::string_view id) {
  for (const auto& t : kTemplates) {
    if (t.id == id) return t;
  }
  throw Error(Errc::InvalidArgument, "unknown synthesis template '" + std::string(id) + "'");
}

std::string fill(std::string_view text, std::string_view slot, std::string_view value) {
  std::string out(text);
  const auto at = out.find(slot);
  if (at != std::string::npos) out.replace(at, slot.size(), value);
  return out;
}

// Drops commas that directly precede '}' or ']' (ignoring whitespace) outside
// string literals; LMs frequently emit them.
std::string strip_trailing_commas(std::string_view in) {
  std::string out;
  out.reserve(in.size());
  bool in_string = false;
  bool escaped = false;
  for (std::size_t i = 0; i < in.size(); ++i) {
    const char c = in[i];
    if (in_string) {
      out.push_back(c);
      if (escaped) {
        escaped = false;
      } else if (c == '\\') {
        escaped = true;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"') in_string = true;
    if (c == ',') {
      std::size_t j = i + 1;
      while (j < in.size() && (in[j] == ' ' || in[j] == '\n' || in[j] == '\r' || in[j] == '\t')) ++j;
      if (j < in.size() && (in[j] == '}' || in[j] == ']')) continue;
    }
    out.push_back(c);
  }
  return out;
}

std::string scalar_text(const nlohmann::json& v) {
  return v.is_string() ? v.get<std::string>() : v.dump();
}

}  // namespace

std::vector<std::string> synthesis_template_ids() {
  std::vector<std::string> ids;
  for (const auto& t : kTemplates) ids.emplace_back(t.id);
  return ids;
}

std::vector<ChatMessage> render_synthesis_prompt(std::string_view template_id,
                                                 std::string_view context) {
  const auto& t = find_template(template_id);
  return {{"system", fill(t.system, "{Examples}", t.examples)},
          {"user", fill(t.user, "{Context}", context)}};
}

SyntheticQuery parse_synthetic_query(std::string_view content, std::string_view source_chunk) {
  const auto open = content.find('{');
  const auto close = content.rfind('}');
  if (open == std::string_view::npos || close == std::string_view::npos || close < open) {
    throw Error(Errc::ParseError, "reply contains no JSON object");
  }
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(strip_trailing_commas(content.substr(open, close - open + 1)));
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::ParseError, std::string("reply is not valid JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("question") || !j["question"].is_string() ||
      j["question"].get<std::string>().empty()) {
    throw Error(Errc::ParseError, "reply lacks a nonempty \"question\" string");
  }

  SyntheticQuery q;
  q.question = j["question"].get<std::string>();
  q.source_chunk = std::string(source_chunk);
  q.raw_payload = std::string(content);
  if (j.contains("options") && !j["options"].is_null()) {
    if (!j["options"].is_object()) throw Error(Errc::ParseError, "\"options\" must be an object");
    std::map<std::string, std::string> options;
    for (const auto& [key, value] : j["options"].items()) options[key] = scalar_text(value);
    q.options = std::move(options);
  }
  if (j.contains("answer") && !j["answer"].is_null()) q.answer = scalar_text(j["answer"]);
  if (q.options && q.answer && !q.options->contains(*q.answer)) {
    throw Error(Errc::InconsistentAnswerKey,
                "answer '" + *q.answer + "' is not one of the option keys");
  }
  return q;
}

SynthesisResult synthesize_queries(const EndpointConfig& chat, std::span<const DocumentChunk> chunks,
                                   std::string_view template_id, std::size_t n_per_chunk) {
  find_template(template_id);
  if (chunks.empty()) throw Error(Errc::InvalidArgument, "no chunks to synthesize from");
  if (n_per_chunk == 0) throw Error(Errc::InvalidArgument, "n_per_chunk must be positive");

  const std::size_t total = chunks.size() * n_per_chunk;
  std::vector<std::optional<SyntheticQuery>> parsed(total);
  std::vector<std::string> warnings(total);

  detail::bounded_for(total, chat.max_in_flight, [&](std::size_t r) {
    const auto& chunk = chunks[r / n_per_chunk];
    const auto messages = render_synthesis_prompt(template_id, chunk.text);
    for (int attempt = 0; attempt < 2; ++attempt) {
      std::optional<std::uint64_t> seed;
      if (chat.seed) seed = *chat.seed + r + static_cast<std::uint64_t>(attempt) * total;
      const auto content = chat_complete(chat, messages, seed);
      try {
        parsed[r] = parse_synthetic_query(content, chunk.chunk_id);
        return;
      } catch (const Error& e) {
        if (e.code() == Errc::InconsistentAnswerKey) {
          warnings[r] = chunk.chunk_id + ": skipped, " + e.what();
          return;
        }
        if (attempt == 1) warnings[r] = chunk.chunk_id + ": skipped after retry, " + e.what();
      }
    }
  });

  SynthesisResult result;
  for (std::size_t r = 0; r < total; ++r) {
    if (parsed[r]) result.queries.push_back(std::move(*parsed[r]));
    if (!warnings[r].empty()) result.warnings.push_back(std::move(warnings[r]));
  }
  if (result.queries.empty()) {
    throw Error(Errc::NoSuccessfulParses,
                "none of " + std::to_string(total) + " synthesis replies could be parsed");
  }
  return result;
}

std::string to_json_line(const SyntheticQuery& q, std::string_view id) {
  nlohmann::ordered_json j;
  j["id"] = id;
  j["text"] = q.question;
  j["source_chunk"] = q.source_chunk;
  j["options"] = q.options ? nlohmann::ordered_json(*q.options) : nlohmann::ordered_json(nullptr);
  j["answer"] = q.answer ? nlohmann::ordered_json(*q.answer) : nlohmann::ordered_json(nullptr);
  j["raw_payload"] = q.raw_payload;
  return j.dump();
}

}  // namespace ookgate
