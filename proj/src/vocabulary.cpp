// Copyright (c) 2026 The lutlm Authors
// SPDX-License-Identifier: Apache-2.0

#include "lutlm/vocabulary.hpp"

#include <fstream>
#include <stdexcept>

namespace lutlm {

const char* token_kind_name(TokenKind kind) {
  switch (kind) {
    case TokenKind::Regular: return "regular";
    case TokenKind::Emoji: return "emoji";
    case TokenKind::Url: return "url";
    case TokenKind::Mention: return "mention";
    case TokenKind::Special: return "special";
  }
  return "regular";
}

const std::string& Vocabulary::token(std::int32_t id) const {
  if (id < 0 || id >= size()) {
    throw std::out_of_range("vocabulary id " + std::to_string(id) + " out of range [0," +
                            std::to_string(size()) + ")");
  }
  return tokens_[static_cast<std::size_t>(id)];
}

std::optional<std::int32_t> Vocabulary::id_of(const std::string& token) const {
  auto it = ids_.find(token);
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

void Vocabulary::append(const std::string& token, const char* origin, std::size_t line_no) {
  if (token.empty()) {
    throw std::runtime_error(std::string(origin) + " line " + std::to_string(line_no) +
                             ": empty token");
  }
  auto [it, inserted] = ids_.emplace(token, static_cast<std::int32_t>(tokens_.size()));
  if (!inserted) {
    throw std::runtime_error(std::string(origin) + " line " + std::to_string(line_no) +
                             ": duplicate token '" + token + "'");
  }
  tokens_.push_back(token);
}

void Vocabulary::finalize_specials() {
  auto need = [&](const char* tok) {
    auto id = id_of(tok);
    if (!id) throw std::runtime_error(std::string("vocabulary is missing special token ") + tok);
    return *id;
  };
  pad_id_ = need(kPadToken);
  unk_id_ = need(kUnkToken);
  cls_id_ = need(kClsToken);
  sep_id_ = need(kSepToken);
  mask_id_ = need(kMaskToken);
  if (pad_id_ != 0) {
    throw std::runtime_error("[PAD] must have id 0, found id " + std::to_string(pad_id_));
  }
}

static std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  // A trailing newline produces no extra line; a final empty line is dropped.
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

Vocabulary Vocabulary::load(const std::string& vocab_path, const std::string& emoticon_path) {
  Vocabulary v;
  const auto base = read_lines(vocab_path);
  for (std::size_t i = 0; i < base.size(); ++i) v.append(base[i], "vocabulary", i + 1);
  v.base_size_ = static_cast<std::int32_t>(v.tokens_.size());
  if (!v.contains(kUrlToken)) v.append(kUrlToken, "sentinel", 0);
  if (!v.contains(kMentionToken)) v.append(kMentionToken, "sentinel", 0);
  if (!emoticon_path.empty()) {
    const auto emo = read_lines(emoticon_path);
    for (std::size_t i = 0; i < emo.size(); ++i) {
      v.append(emo[i], "emoticon list", i + 1);
      v.emoticons_.insert(emo[i]);
    }
  }
  v.finalize_specials();
  return v;
}

Vocabulary Vocabulary::from_tokens(const std::vector<std::string>& base,
                                   const std::vector<std::string>& emoticons) {
  Vocabulary v;
  for (std::size_t i = 0; i < base.size(); ++i) v.append(base[i], "vocabulary", i + 1);
  v.base_size_ = static_cast<std::int32_t>(v.tokens_.size());
  if (!v.contains(kUrlToken)) v.append(kUrlToken, "sentinel", 0);
  if (!v.contains(kMentionToken)) v.append(kMentionToken, "sentinel", 0);
  for (std::size_t i = 0; i < emoticons.size(); ++i) {
    v.append(emoticons[i], "emoticon list", i + 1);
    v.emoticons_.insert(emoticons[i]);
  }
  v.finalize_specials();
  return v;
}

std::vector<char32_t> utf8_codepoints(const std::string& s) {
  std::vector<char32_t> out;
  std::size_t i = 0;
  while (i < s.size()) {
    const unsigned char b = static_cast<unsigned char>(s[i]);
    char32_t cp = 0xFFFD;
    std::size_t len = 1;
    if (b < 0x80) {
      cp = b;
    } else if ((b >> 5) == 0x6 && i + 1 < s.size()) {
      cp = static_cast<char32_t>((b & 0x1F) << 6 | (s[i + 1] & 0x3F));
      len = 2;
    } else if ((b >> 4) == 0xE && i + 2 < s.size()) {
      cp = static_cast<char32_t>((b & 0x0F) << 12 | (s[i + 1] & 0x3F) << 6 | (s[i + 2] & 0x3F));
      len = 3;
    } else if ((b >> 3) == 0x1E && i + 3 < s.size()) {
      cp = static_cast<char32_t>((b & 0x07) << 18 | (s[i + 1] & 0x3F) << 12 |
                                 (s[i + 2] & 0x3F) << 6 | (s[i + 3] & 0x3F));
      len = 4;
    }
    out.push_back(cp);
    i += len;
  }
  return out;
}

bool is_emoji_codepoint(char32_t cp) {
  return (cp >= 0x1F600 && cp <= 0x1F64F) ||  // Emoticons
         (cp >= 0x1F300 && cp <= 0x1F5FF) ||  // Misc Symbols and Pictographs
         (cp >= 0x1F900 && cp <= 0x1F9FF) ||  // Supplemental Symbols and Pictographs
         (cp >= 0x1F680 && cp <= 0x1F6FF);    // Transport and Map
}

static bool is_word_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_';
}

TokenKind classify_token(const std::string& token, const Vocabulary& vocab) {
  if (token == kPadToken || token == kUnkToken || token == kClsToken || token == kSepToken ||
      token == kMaskToken) {
    return TokenKind::Special;
  }
  if (token == kUrlToken || token.rfind("http://", 0) == 0 || token.rfind("https://", 0) == 0 ||
      token.find("t.co/") != std::string::npos) {
    return TokenKind::Url;
  }
  if (token == kMentionToken || (token.size() >= 2 && token[0] == '@' && is_word_char(token[1]))) {
    return TokenKind::Mention;
  }
  if (vocab.is_emoticon(token)) return TokenKind::Emoji;
  if (!token.empty()) {
    const auto cps = utf8_codepoints(token);
    bool all_emoji = !cps.empty();
    for (char32_t cp : cps) {
      if (!is_emoji_codepoint(cp)) {
        all_emoji = false;
        break;
      }
    }
    if (all_emoji) return TokenKind::Emoji;
  }
  return TokenKind::Regular;
}

}  // namespace lutlm
