// Copyright (c) 2026 The lutlm Authors
// SPDX-License-Identifier: Apache-2.0

#include "lutlm/wordpiece.hpp"

#include <cctype>

namespace lutlm {

namespace {

constexpr std::size_t kMaxPretokenBytes = 100;  // longer pre-tokens become [UNK]

bool is_ascii_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool is_ascii_punct(char c) {
  return std::ispunct(static_cast<unsigned char>(c)) != 0;
}

// Byte length of the UTF-8 sequence starting at s[i].
std::size_t utf8_len(const std::string& s, std::size_t i) {
  const unsigned char b = static_cast<unsigned char>(s[i]);
  if (b < 0x80) return 1;
  if ((b >> 5) == 0x6) return (i + 1 < s.size()) ? 2 : 1;
  if ((b >> 4) == 0xE) return (i + 2 < s.size()) ? 3 : 1;
  if ((b >> 3) == 0x1E) return (i + 3 < s.size()) ? 4 : 1;
  return 1;
}

}  // namespace

std::vector<std::string> pretokenize(const std::string& text, const Vocabulary& vocab) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_ascii_space(text[i])) ++i;
    if (i >= text.size()) break;
    std::size_t j = i;
    while (j < text.size() && !is_ascii_space(text[j])) ++j;
    const std::string chunk = text.substr(i, j - i);
    i = j;

    const TokenKind kind = classify_token(chunk, vocab);
    if (kind == TokenKind::Url || kind == TokenKind::Mention || vocab.is_emoticon(chunk)) {
      out.push_back(chunk);
      continue;
    }
    std::string run;
    std::size_t k = 0;
    auto flush = [&]() {
      if (!run.empty()) {
        out.push_back(run);
        run.clear();
      }
    };
    while (k < chunk.size()) {
      const std::size_t len = utf8_len(chunk, k);
      const std::string cu = chunk.substr(k, len);
      if (len == 1 && is_ascii_punct(cu[0])) {
        flush();
        out.push_back(cu);
      } else if (len > 1 && is_emoji_codepoint(utf8_codepoints(cu)[0])) {
        flush();
        out.push_back(cu);
      } else {
        run += cu;
      }
      k += len;
    }
    flush();
  }
  return out;
}

std::string normalize_pretoken(const std::string& pretoken, const Vocabulary& vocab) {
  switch (classify_token(pretoken, vocab)) {
    case TokenKind::Url: return kUrlToken;
    case TokenKind::Mention:
      return pretoken == kMentionToken || pretoken.size() >= 2 ? kMentionToken : pretoken;
    default: return pretoken;
  }
}

std::vector<std::string> wordpiece_tokenize(const std::string& pretoken, const Vocabulary& vocab) {
  if (pretoken.empty()) return {};
  if (pretoken.size() > kMaxPretokenBytes) return {kUnkToken};
  std::vector<std::string> pieces;
  std::size_t start = 0;
  while (start < pretoken.size()) {
    std::size_t end = pretoken.size();
    std::string match;
    while (start < end) {
      std::string candidate = pretoken.substr(start, end - start);
      if (start > 0) candidate = "##" + candidate;
      if (vocab.contains(candidate)) {
        match = std::move(candidate);
        break;
      }
      // back off one UTF-8 codepoint, not one byte
      std::size_t back = end - 1;
      while (back > start && (static_cast<unsigned char>(pretoken[back]) & 0xC0) == 0x80) --back;
      end = back;
    }
    if (match.empty()) return {kUnkToken};
    pieces.push_back(std::move(match));
    start = end;
  }
  return pieces;
}

std::string wordpiece_detokenize(const std::vector<std::string>& pieces) {
  std::string out;
  for (const auto& p : pieces) {
    if (p.rfind("##", 0) == 0) {
      out += p.substr(2);
    } else {
      out += p;
    }
  }
  return out;
}

TokenizedText tokenize_text(const std::string& text, const Vocabulary& vocab) {
  TokenizedText result;
  for (const std::string& raw : pretokenize(text, vocab)) {
    const std::string pre = normalize_pretoken(raw, vocab);
    const std::size_t owner = result.pretokens.size();
    result.pretokens.push_back(pre);
    for (auto& piece : wordpiece_tokenize(pre, vocab)) {
      result.pieces.push_back(std::move(piece));
      result.piece_owner.push_back(owner);
    }
  }
  return result;
}

}  // namespace lutlm
