#pragma once

#include <map>
#include <string>

// Prompt templates ship as text assets under core/templates/ and are
// embedded at build time. Each carries a versioned id that synthesis
// reports record, so a dataset can be traced back to the exact prompt
// wording that produced it.

namespace distill {

struct PromptTemplate {
  std::string id;    // e.g. "alignment-extract@1"
  std::string text;  // {{slot}} placeholders
};

struct TemplateSet {
  PromptTemplate solve;          // question -> reasoning + answer
  PromptTemplate reverse;        // question + answer -> reasoning
  PromptTemplate expand;         // seed examples -> new example
  PromptTemplate verify;         // question + reasoning -> answer

  static const TemplateSet& builtin();
};

// Replaces every {{key}} with its value. Unknown placeholders are left
// in place.
std::string render(const PromptTemplate& tpl,
                   const std::map<std::string, std::string>& slots);

}  // namespace distill
