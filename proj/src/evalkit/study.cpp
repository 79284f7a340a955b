#include <fstream>
#include <sstream>

#include "seeds/error.hpp"
#include "seeds/evalkit.hpp"

namespace seeds::evalkit {

const char* to_string(StudyChoice c) {
  switch (c) {
    case StudyChoice::near_duplicate: return "near_duplicate";
    case StudyChoice::insertion: return "insertion";
    case StudyChoice::texture_transfer: return "texture_transfer";
    case StudyChoice::other: return "other";
    case StudyChoice::unrelated: return "unrelated";
  }
  return "other";
}

StudyChoice parse_study_choice(const std::string& s) {
  for (auto c : {StudyChoice::near_duplicate, StudyChoice::insertion, StudyChoice::texture_transfer, StudyChoice::other,
                 StudyChoice::unrelated})
    if (s == to_string(c)) return c;
  fail(ErrorCode::PreconditionViolated, "unknown study choice '" + s + "'");
}

StudyResponse study_response_from_json(const nlohmann::json& j) {
  return {j.at("participant_id").get<std::string>(), j.at("item_id").get<std::string>(),
          parse_study_choice(j.at("choice").get<std::string>())};
}

std::vector<StudyResponse> read_study_responses(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorCode::Io, "cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  std::vector<StudyResponse> out;
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return out;
  if (text[first] == '[') {
    for (const auto& j : nlohmann::json::parse(text)) out.push_back(study_response_from_json(j));
    return out;
  }
  std::istringstream lines(text);
  std::string line;
  while (std::getline(lines, line))
    if (line.find_first_not_of(" \t\r") != std::string::npos)
      out.push_back(study_response_from_json(nlohmann::json::parse(line)));
  return out;
}

std::map<StudyChoice, double> aggregate_user_study(std::span<const StudyResponse> responses,
                                                   const std::map<std::string, double>& lengths) {
  std::map<StudyChoice, std::pair<double, std::size_t>> acc;
  for (const auto& r : responses) {
    const auto it = lengths.find(r.item_id);
    require(it != lengths.end(), ErrorCode::MissingLength, "no description length for item '" + r.item_id + "'");
    auto& [sum, n] = acc[r.choice];
    sum += it->second;
    ++n;
  }
  std::map<StudyChoice, double> out;
  for (const auto& [choice, sn] : acc) out[choice] = sn.first / static_cast<double>(sn.second);
  return out;
}

}  // namespace seeds::evalkit
