/*
 * Copyright 2026 The paracheck Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "paracheck/program.hpp"

#include <charconv>
#include <set>
#include <sstream>
#include <unordered_map>

#include "paracheck/util.hpp"

namespace paracheck {

ParseError::ParseError(std::size_t line, const std::string& what)
    : std::runtime_error(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
      line_(line) {}

namespace {

enum class Form {
  R,       // op rd, rs1, rs2
  I,       // op rd, rs1, imm
  Li,      // li rd, imm
  F2,      // fmv rd, rs1
  Mem,     // ld rd, imm(rs1) / sd rs2, imm(rs1)
  Branch,  // op rs1, rs2, target
  Jal,     // jal rd, target
  Jalr,    // jalr rd, imm(rs1)
  J,       // j target
  Csr,     // csrr rd, csr
  None,    // ecall / nop
};

struct OpInfo {
  Opcode op;
  Form form;
};

const std::unordered_map<std::string, OpInfo>& op_table() {
  static const std::unordered_map<std::string, OpInfo> table = {
      {"add", {Opcode::Add, Form::R}},     {"sub", {Opcode::Sub, Form::R}},
      {"and", {Opcode::And, Form::R}},     {"or", {Opcode::Or, Form::R}},
      {"xor", {Opcode::Xor, Form::R}},     {"sll", {Opcode::Sll, Form::R}},
      {"srl", {Opcode::Srl, Form::R}},     {"slt", {Opcode::Slt, Form::R}},
      {"addi", {Opcode::Addi, Form::I}},   {"andi", {Opcode::Andi, Form::I}},
      {"ori", {Opcode::Ori, Form::I}},     {"xori", {Opcode::Xori, Form::I}},
      {"slli", {Opcode::Slli, Form::I}},   {"srli", {Opcode::Srli, Form::I}},
      {"li", {Opcode::Li, Form::Li}},      {"mul", {Opcode::Mul, Form::R}},
      {"div", {Opcode::Div, Form::R}},     {"rem", {Opcode::Rem, Form::R}},
      {"fadd", {Opcode::Fadd, Form::R}},   {"fmul", {Opcode::Fmul, Form::R}},
      {"fmv.d.x", {Opcode::FmvDX, Form::F2}},
      {"fmv.x.d", {Opcode::FmvXD, Form::F2}},
      {"ld", {Opcode::Ld, Form::Mem}},     {"sd", {Opcode::Sd, Form::Mem}},
      {"beq", {Opcode::Beq, Form::Branch}}, {"bne", {Opcode::Bne, Form::Branch}},
      {"blt", {Opcode::Blt, Form::Branch}}, {"bge", {Opcode::Bge, Form::Branch}},
      {"jal", {Opcode::Jal, Form::Jal}},   {"jalr", {Opcode::Jal, Form::Jalr}},
      {"j", {Opcode::Jal, Form::J}},       {"csrr", {Opcode::Csrr, Form::Csr}},
      {"ecall", {Opcode::Ecall, Form::None}}, {"nop", {Opcode::Nop, Form::None}},
  };
  return table;
}

const std::unordered_map<std::string, std::uint16_t>& csr_names() {
  static const std::unordered_map<std::string, std::uint16_t> names = {
      {"cycle", 0xC00}, {"time", 0xC01}, {"instret", 0xC02},
      {"mstatus", kCsrMstatus}, {"mscratch", kCsrMscratch},
      {"mepc", kCsrMepc}, {"mcause", kCsrMcause},
  };
  return names;
}

bool is_identifier(std::string_view s) {
  if (s.empty()) return false;
  if (!(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_' || s[0] == '.')) return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.';
  });
}

std::optional<std::int64_t> parse_int(std::string_view s) {
  s = trim(s);
  bool neg = false;
  if (!s.empty() && (s[0] == '-' || s[0] == '+')) {
    neg = s[0] == '-';
    s.remove_prefix(1);
  }
  int base = 10;
  if (s.size() > 2 && s[0] == '0' && (s[1] == 'x' || s[1] == 'X')) {
    base = 16;
    s.remove_prefix(2);
  }
  if (s.empty()) return std::nullopt;
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v, base);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  const auto sv = static_cast<std::int64_t>(v);
  return neg ? -sv : sv;
}

struct PendingTarget {
  std::size_t index;
  std::string label;
  std::size_t line;
  bool relative;
};

class LineParser {
 public:
  LineParser(std::size_t line, std::vector<std::string_view> ops)
      : line_(line), ops_(std::move(ops)) {}

  void expect(std::size_t n, std::string_view mnem) const {
    if (ops_.size() != n) {
      throw ParseError(line_, "'" + std::string(mnem) + "' expects " +
                                  std::to_string(n) + " operands, got " +
                                  std::to_string(ops_.size()));
    }
  }

  std::uint8_t reg(std::size_t i, bool fp) const {
    std::string_view s = ops_.at(i);
    const char bank = fp ? 'f' : 'x';
    if (s.size() < 2 || std::tolower(static_cast<unsigned char>(s[0])) != bank) {
      throw ParseError(line_, "expected " + std::string(1, bank) + " register, got '" +
                                  std::string(s) + "'");
    }
    auto v = parse_int(s.substr(1));
    if (!v || s.substr(1).find_first_not_of("0123456789") != std::string_view::npos) {
      throw ParseError(line_, "malformed register '" + std::string(s) + "'");
    }
    if (*v < 0 || *v > 31) {
      throw ParseError(line_, "register index out of range: '" + std::string(s) + "'");
    }
    return static_cast<std::uint8_t>(*v);
  }

  std::int64_t imm(std::size_t i) const {
    auto v = parse_int(ops_.at(i));
    if (!v) throw ParseError(line_, "malformed immediate '" + std::string(ops_.at(i)) + "'");
    return *v;
  }

  // "imm(xN)"
  std::pair<std::int64_t, std::uint8_t> mem(std::size_t i) const {
    std::string_view s = ops_.at(i);
    const auto open = s.find('(');
    const auto close = s.rfind(')');
    if (open == std::string_view::npos || close == std::string_view::npos ||
        close < open || close != s.size() - 1) {
      throw ParseError(line_, "malformed memory operand '" + std::string(s) + "'");
    }
    std::string_view off = trim(s.substr(0, open));
    std::int64_t value = 0;
    if (!off.empty()) {
      auto v = parse_int(off);
      if (!v) throw ParseError(line_, "malformed offset '" + std::string(off) + "'");
      value = *v;
    }
    LineParser inner(line_, {trim(s.substr(open + 1, close - open - 1))});
    return {value, inner.reg(0, false)};
  }

  std::uint16_t csr(std::size_t i) const {
    std::string_view s = ops_.at(i);
    auto it = csr_names().find(std::string(s));
    if (it != csr_names().end()) return it->second;
    auto v = parse_int(s);
    if (!v || *v < 0 || *v > 0xFFF) {
      throw ParseError(line_, "bad CSR '" + std::string(s) + "'");
    }
    return static_cast<std::uint16_t>(*v);
  }

  std::string_view op(std::size_t i) const { return ops_.at(i); }

 private:
  std::size_t line_;
  std::vector<std::string_view> ops_;
};

}  // namespace

Program parse_program(std::string_view text) {
  Program prog;
  std::vector<PendingTarget> pending;
  std::optional<std::pair<std::string, std::size_t>> entry_label;

  std::size_t line_no = 0;
  for (std::string_view raw : split(text, '\n')) {
    ++line_no;
    if (auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
    std::string_view line = trim(raw);

    // Leading labels, possibly several.
    while (true) {
      const auto colon = line.find(':');
      if (colon == std::string_view::npos) break;
      std::string_view name = trim(line.substr(0, colon));
      if (!is_identifier(name) || name.find(' ') != std::string_view::npos) break;
      std::string key(name);
      if (prog.labels.count(key)) throw ParseError(line_no, "duplicate label '" + key + "'");
      prog.labels[key] = prog.code.size();
      line = trim(line.substr(colon + 1));
    }
    if (line.empty()) continue;

    std::size_t sp = 0;
    while (sp < line.size() && !std::isspace(static_cast<unsigned char>(line[sp]))) ++sp;
    std::string mnem(line.substr(0, sp));
    std::transform(mnem.begin(), mnem.end(), mnem.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    std::string_view rest = trim(line.substr(sp));

    if (mnem == ".entry") {
      if (!is_identifier(rest)) throw ParseError(line_no, "'.entry' expects a label");
      entry_label = {std::string(rest), line_no};
      continue;
    }

    auto it = op_table().find(mnem);
    if (it == op_table().end()) throw ParseError(line_no, "unknown mnemonic '" + mnem + "'");

    std::vector<std::string_view> ops;
    if (!rest.empty()) {
      for (auto tok : split(rest, ',')) {
        tok = trim(tok);
        if (tok.empty()) throw ParseError(line_no, "empty operand");
        ops.push_back(tok);
      }
    }
    LineParser p(line_no, ops);
    Instruction in;
    in.op = it->second.op;
    const std::size_t index = prog.code.size();

    switch (it->second.form) {
      case Form::R: {
        p.expect(3, mnem);
        const bool fp = in.op == Opcode::Fadd || in.op == Opcode::Fmul;
        in.dest = p.reg(0, fp);
        in.src1 = p.reg(1, fp);
        in.src2 = p.reg(2, fp);
        break;
      }
      case Form::I:
        p.expect(3, mnem);
        in.dest = p.reg(0, false);
        in.src1 = p.reg(1, false);
        in.imm = p.imm(2);
        break;
      case Form::Li:
        p.expect(2, mnem);
        in.dest = p.reg(0, false);
        in.imm = p.imm(1);
        break;
      case Form::F2:
        p.expect(2, mnem);
        in.dest = p.reg(0, in.dest_is_fp());
        in.src1 = p.reg(1, in.src1_is_fp());
        break;
      case Form::Mem: {
        p.expect(2, mnem);
        auto [off, base] = p.mem(1);
        if (in.op == Opcode::Ld) {
          in.dest = p.reg(0, false);
        } else {
          in.src2 = p.reg(0, false);
        }
        in.src1 = base;
        in.imm = off;
        break;
      }
      case Form::Branch: {
        p.expect(3, mnem);
        in.src1 = p.reg(0, false);
        in.src2 = p.reg(1, false);
        if (auto v = parse_int(p.op(2))) {
          in.imm = *v;
        } else {
          if (!is_identifier(p.op(2))) throw ParseError(line_no, "bad branch target");
          pending.push_back({index, std::string(p.op(2)), line_no, true});
        }
        break;
      }
      case Form::Jal:
        p.expect(2, mnem);
        in.dest = p.reg(0, false);
        if (auto v = parse_int(p.op(1))) {
          in.imm = static_cast<std::int64_t>(index) + *v;
        } else {
          if (!is_identifier(p.op(1))) throw ParseError(line_no, "bad jump target");
          pending.push_back({index, std::string(p.op(1)), line_no, false});
        }
        break;
      case Form::Jalr: {
        p.expect(2, mnem);
        in.dest = p.reg(0, false);
        auto [off, base] = p.mem(1);
        in.src1 = base;
        in.imm = off;
        break;
      }
      case Form::J:
        p.expect(1, mnem);
        if (!is_identifier(p.op(0))) throw ParseError(line_no, "bad jump target");
        pending.push_back({index, std::string(p.op(0)), line_no, false});
        break;
      case Form::Csr:
        p.expect(2, mnem);
        in.dest = p.reg(0, false);
        in.csr = p.csr(1);
        break;
      case Form::None:
        p.expect(0, mnem);
        break;
    }
    prog.code.push_back(in);
  }

  for (const auto& t : pending) {
    auto it = prog.labels.find(t.label);
    if (it == prog.labels.end()) throw ParseError(t.line, "unresolved label '" + t.label + "'");
    const auto target = static_cast<std::int64_t>(it->second);
    prog.code[t.index].imm = t.relative ? target - static_cast<std::int64_t>(t.index) : target;
  }
  if (entry_label) {
    auto it = prog.labels.find(entry_label->first);
    if (it == prog.labels.end()) {
      throw ParseError(entry_label->second, "unresolved label '" + entry_label->first + "'");
    }
    prog.entry = it->second;
  }
  validate_targets(prog);
  return prog;
}

namespace {

std::optional<std::size_t> static_target(const Instruction& in, std::size_t index) {
  if (in.cls() == InstrClass::Branch) {
    return static_cast<std::size_t>(static_cast<std::int64_t>(index) + in.imm);
  }
  if (in.op == Opcode::Jal && in.src1 == 0) return static_cast<std::size_t>(in.imm);
  return std::nullopt;
}

}  // namespace

void validate_targets(const Program& program) {
  const auto n = static_cast<std::int64_t>(program.size());
  for (std::size_t i = 0; i < program.size(); ++i) {
    const Instruction& in = program.code[i];
    std::int64_t target = 0;
    if (in.cls() == InstrClass::Branch) {
      target = static_cast<std::int64_t>(i) + in.imm;
    } else if (in.op == Opcode::Jal && in.src1 == 0) {
      target = in.imm;
    } else {
      continue;
    }
    // Index n is the program end; control reaching it halts.
    if (target < 0 || target > n) {
      throw ParseError(0, "instruction " + std::to_string(i) + " targets invalid index " +
                              std::to_string(target));
    }
  }
  if (program.entry > program.size()) throw ParseError(0, "entry point out of range");
}

std::string format_instruction(const Instruction& in) {
  auto x = [](int r) { return "x" + std::to_string(r); };
  auto f = [](int r) { return "f" + std::to_string(r); };
  std::string m(mnemonic(in.op));
  switch (in.op) {
    case Opcode::Fadd: case Opcode::Fmul:
      return m + " " + f(in.dest) + ", " + f(in.src1) + ", " + f(in.src2);
    case Opcode::FmvDX:
      return m + " " + f(in.dest) + ", " + x(in.src1);
    case Opcode::FmvXD:
      return m + " " + x(in.dest) + ", " + f(in.src1);
    case Opcode::Addi: case Opcode::Andi: case Opcode::Ori: case Opcode::Xori:
    case Opcode::Slli: case Opcode::Srli:
      return m + " " + x(in.dest) + ", " + x(in.src1) + ", " + std::to_string(in.imm);
    case Opcode::Li:
      return m + " " + x(in.dest) + ", " + std::to_string(in.imm);
    case Opcode::Ld:
      return m + " " + x(in.dest) + ", " + std::to_string(in.imm) + "(" + x(in.src1) + ")";
    case Opcode::Sd:
      return m + " " + x(in.src2) + ", " + std::to_string(in.imm) + "(" + x(in.src1) + ")";
    case Opcode::Beq: case Opcode::Bne: case Opcode::Blt: case Opcode::Bge:
      return m + " " + x(in.src1) + ", " + x(in.src2) + ", " + std::to_string(in.imm);
    case Opcode::Jal:
      return "jalr " + x(in.dest) + ", " + std::to_string(in.imm) + "(" + x(in.src1) + ")";
    case Opcode::Csrr:
      return m + " " + x(in.dest) + ", " + std::to_string(in.csr);
    case Opcode::Ecall: case Opcode::Nop:
      return m;
    default:
      return m + " " + x(in.dest) + ", " + x(in.src1) + ", " + x(in.src2);
  }
}

std::string format_program(const Program& program) {
  std::map<std::size_t, std::vector<std::string>> names;
  for (const auto& [name, idx] : program.labels) names[idx].push_back(name);
  auto label_for = [&](std::size_t idx) -> std::string {
    auto& v = names[idx];
    if (v.empty()) v.push_back("L" + std::to_string(idx));
    return v.front();
  };
  for (std::size_t i = 0; i < program.size(); ++i) {
    if (auto t = static_target(program.code[i], i)) label_for(*t);
  }
  if (program.entry != 0) label_for(program.entry);

  std::ostringstream os;
  if (program.entry != 0) os << ".entry " << label_for(program.entry) << "\n";
  for (std::size_t i = 0; i <= program.size(); ++i) {
    if (auto it = names.find(i); it != names.end()) {
      for (const auto& n : it->second) os << n << ":\n";
    }
    if (i == program.size()) break;
    const Instruction& in = program.code[i];
    os << "    ";
    if (auto t = static_target(in, i)) {
      if (in.cls() == InstrClass::Branch) {
        os << mnemonic(in.op) << " x" << int(in.src1) << ", x" << int(in.src2) << ", "
           << label_for(*t);
      } else {
        os << "jal x" << int(in.dest) << ", " << label_for(*t);
      }
    } else {
      os << format_instruction(in);
    }
    os << "\n";
  }
  return os.str();
}

}  // namespace paracheck
