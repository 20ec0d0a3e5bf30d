#include "distillplan/prompts.hpp"

namespace distill {

std::string render(const PromptTemplate& tpl,
                   const std::map<std::string, std::string>& slots) {
  std::string out = tpl.text;
  for (const auto& [key, value] : slots) {
    const std::string needle = "{{" + key + "}}";
    std::size_t pos = 0;
    while ((pos = out.find(needle, pos)) != std::string::npos) {
      out.replace(pos, needle.size(), value);
      pos += value.size();
    }
  }
  return out;
}

}  // namespace distill
