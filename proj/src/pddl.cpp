#include "planex/pddl.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <map>
#include <set>
#include <sstream>

#include "planex/errors.hpp"
#include "planex/plan_io.hpp"

namespace planex {

namespace {

// ---------------------------------------------------------------------------
// S-expression layer

struct Sexp {
    bool atom = false;
    std::string text;          // atoms
    std::vector<Sexp> items;   // lists
    int line = 0;

    bool is(const std::string& head) const {
        return !atom && !items.empty() && items[0].atom && items[0].text == head;
    }
    const std::string& head() const {
        static const std::string empty;
        if (atom) return text;
        if (items.empty() || !items[0].atom) return empty;
        return items[0].text;
    }
};

class Lexer {
public:
    explicit Lexer(const std::string& text) : text_(text) {}

    Sexp parse_all() {
        Sexp root;
        root.line = 1;
        while (true) {
            skip_ws();
            if (pos_ >= text_.size()) break;
            root.items.push_back(parse_one());
        }
        return root;
    }

private:
    void skip_ws() {
        while (pos_ < text_.size()) {
            const char c = text_[pos_];
            if (c == ';') {
                while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
            } else if (c == '\n') {
                ++line_;
                ++pos_;
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                ++pos_;
            } else {
                break;
            }
        }
    }

    Sexp parse_one() {
        skip_ws();
        if (pos_ >= text_.size()) throw SyntaxError("unexpected end of input", line_);
        Sexp node;
        node.line = line_;
        if (text_[pos_] == '(') {
            ++pos_;
            while (true) {
                skip_ws();
                if (pos_ >= text_.size())
                    throw SyntaxError("unterminated list", node.line);
                if (text_[pos_] == ')') {
                    ++pos_;
                    return node;
                }
                node.items.push_back(parse_one());
            }
        }
        if (text_[pos_] == ')') throw SyntaxError("unexpected ')'", line_);
        node.atom = true;
        const std::size_t begin = pos_;
        while (pos_ < text_.size()) {
            const char c = text_[pos_];
            if (c == '(' || c == ')' || c == ';' ||
                std::isspace(static_cast<unsigned char>(c)))
                break;
            ++pos_;
        }
        node.text = text_.substr(begin, pos_ - begin);
        for (char& c : node.text) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        return node;
    }

    const std::string& text_;
    std::size_t pos_ = 0;
    int line_ = 1;
};

bool is_number(const std::string& s, double& out) {
    const char* begin = s.data();
    const char* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(begin, end, out);
    return ec == std::errc() && ptr == end;
}

// ---------------------------------------------------------------------------
// Domain representation before grounding

struct TypedVar {
    std::string name;  // with leading '?'
    std::string type;
};

struct Schema {
    std::string name;
    std::vector<std::string> param_types;
};

struct LiteralTemplate {
    std::string predicate;
    std::vector<std::string> args;  // variables or constants
    bool positive = true;
};

struct ExprTemplate {
    enum class Kind { Constant, Fluent, Add, Sub, Mul, Div } kind = Kind::Constant;
    double constant = 0.0;
    std::string fluent;
    std::vector<std::string> args;
    std::vector<ExprTemplate> children;
};

struct ComparisonTemplate {
    ExprTemplate lhs, rhs;
    Comparator cmp;
};

struct ConditionTemplate {
    TimeTag timing = TimeTag::Untimed;
    std::vector<LiteralTemplate> literals;
    std::vector<ComparisonTemplate> numerics;
};

struct PropEffectTemplate {
    LiteralTemplate lit;  // polarity encodes add/delete
};

struct NumericEffectTemplate {
    std::string fluent;
    std::vector<std::string> args;
    NumericOp op;
    ExprTemplate value;
};

struct EffectTemplate {
    TimeTag timing = TimeTag::Untimed;
    std::vector<PropEffectTemplate> props;
    std::vector<NumericEffectTemplate> numerics;
};

struct EqualityConstraint {
    std::string a, b;
    bool must_equal;
};

struct ActionSchema {
    std::string name;
    bool durative = false;
    std::vector<TypedVar> params;
    std::vector<ConditionTemplate> conditions;
    std::vector<EffectTemplate> effects;
    std::vector<EqualityConstraint> equalities;
    // duration: bounds as expression templates
    ExprTemplate dur_lb, dur_ub;
    bool dur_lb_set = false, dur_ub_set = false;
};

struct Domain {
    std::string name;
    std::map<std::string, std::string> type_parent;  // type -> parent
    std::vector<Schema> predicates;
    std::vector<Schema> functions;
    std::vector<ActionSchema> actions;
    std::vector<ObjectDecl> constants;
};

const std::set<std::string> kKnownRequirements = {
    ":strips",
    ":typing",
    ":fluents",
    ":numeric-fluents",
    ":durative-actions",
    ":duration-inequalities",
    ":timed-initial-literals",
    ":negative-preconditions",
    ":equality",
};

// Constructs explicitly rejected with a named error.
const std::set<std::string> kRejected = {
    "forall", "exists", "when", "imply", "or", "preference", "minimize",
    "maximize", "always", "sometime", "at-most-once", "within",
};

void reject_if_unsupported(const Sexp& node) {
    if (!node.atom && !node.items.empty() && node.items[0].atom &&
        kRejected.count(node.items[0].text))
        throw UnsupportedFeatureError(node.items[0].text);
}

std::vector<TypedVar> parse_typed_list(const Sexp& list, std::size_t from = 0) {
    std::vector<TypedVar> out;
    std::vector<std::string> pending;
    for (std::size_t i = from; i < list.items.size(); ++i) {
        const Sexp& item = list.items[i];
        if (!item.atom) throw SyntaxError("expected a name in typed list", item.line);
        if (item.text == "-") {
            if (i + 1 >= list.items.size())
                throw SyntaxError("dangling '-' in typed list", item.line);
            const std::string& type = list.items[i + 1].text;
            for (const std::string& name : pending) out.push_back(TypedVar{name, type});
            pending.clear();
            ++i;
        } else {
            pending.push_back(item.text);
        }
    }
    for (const std::string& name : pending) out.push_back(TypedVar{name, "object"});
    return out;
}

Comparator parse_comparator(const std::string& op, int line) {
    if (op == "<") return Comparator::Less;
    if (op == "<=") return Comparator::LessEq;
    if (op == "=") return Comparator::Eq;
    if (op == ">=") return Comparator::GreaterEq;
    if (op == ">") return Comparator::Greater;
    throw SyntaxError("unknown comparator '" + op + "'", line);
}

class DomainParser {
public:
    Domain parse(const Sexp& root) {
        if (!root.is("define")) throw SyntaxError("expected (define ...)", root.line);
        Domain domain;
        domain.type_parent["object"] = "";
        for (std::size_t i = 1; i < root.items.size(); ++i) {
            const Sexp& section = root.items[i];
            if (section.is("domain")) {
                domain.name = section.items.at(1).text;
            } else if (section.is(":requirements")) {
                for (std::size_t j = 1; j < section.items.size(); ++j) {
                    if (!kKnownRequirements.count(section.items[j].text))
                        throw UnsupportedFeatureError("requirement " +
                                                      section.items[j].text);
                }
            } else if (section.is(":types")) {
                for (const TypedVar& tv : parse_typed_list(section, 1)) {
                    domain.type_parent[tv.name] = tv.type;
                    if (!domain.type_parent.count(tv.type))
                        domain.type_parent[tv.type] = "object";
                }
            } else if (section.is(":constants")) {
                for (const TypedVar& tv : parse_typed_list(section, 1))
                    domain.constants.push_back(ObjectDecl{tv.name, tv.type});
            } else if (section.is(":predicates")) {
                for (std::size_t j = 1; j < section.items.size(); ++j)
                    domain.predicates.push_back(parse_schema(section.items[j]));
            } else if (section.is(":functions")) {
                for (std::size_t j = 1; j < section.items.size(); ++j)
                    domain.functions.push_back(parse_schema(section.items[j]));
            } else if (section.is(":durative-action")) {
                domain.actions.push_back(parse_durative(section));
            } else if (section.is(":action")) {
                domain.actions.push_back(parse_instantaneous(section));
            } else if (section.is(":constraints") || section.is(":derived")) {
                throw UnsupportedFeatureError(section.head());
            } else {
                throw SyntaxError("unexpected section '" + section.head() + "'",
                                  section.line);
            }
        }
        return domain;
    }

private:
    Schema parse_schema(const Sexp& node) {
        if (node.atom || node.items.empty())
            throw SyntaxError("expected (name ?params...)", node.line);
        Schema schema;
        schema.name = node.items[0].text;
        for (const TypedVar& tv : parse_typed_list(node, 1))
            schema.param_types.push_back(tv.type);
        return schema;
    }

    LiteralTemplate parse_literal(const Sexp& node, bool positive) {
        reject_if_unsupported(node);
        if (node.atom || node.items.empty() || !node.items[0].atom)
            throw SyntaxError("expected a literal", node.line);
        if (node.items[0].text == "not") {
            if (node.items.size() != 2)
                throw SyntaxError("'not' takes one argument", node.line);
            return parse_literal(node.items[1], !positive);
        }
        LiteralTemplate lit;
        lit.predicate = node.items[0].text;
        lit.positive = positive;
        for (std::size_t i = 1; i < node.items.size(); ++i)
            lit.args.push_back(node.items[i].text);
        return lit;
    }

    ExprTemplate parse_expr(const Sexp& node) {
        ExprTemplate e;
        if (node.atom) {
            double v = 0.0;
            if (!is_number(node.text, v))
                throw SyntaxError("expected a number or fluent, got '" + node.text + "'",
                                  node.line);
            e.kind = ExprTemplate::Kind::Constant;
            e.constant = v;
            return e;
        }
        if (node.items.empty() || !node.items[0].atom)
            throw SyntaxError("malformed expression", node.line);
        const std::string& head = node.items[0].text;
        if (head == "+" || head == "-" || head == "*" || head == "/") {
            if (node.items.size() != 3)
                throw SyntaxError("arithmetic takes two operands", node.line);
            e.kind = head == "+"   ? ExprTemplate::Kind::Add
                     : head == "-" ? ExprTemplate::Kind::Sub
                     : head == "*" ? ExprTemplate::Kind::Mul
                                   : ExprTemplate::Kind::Div;
            e.children.push_back(parse_expr(node.items[1]));
            e.children.push_back(parse_expr(node.items[2]));
            return e;
        }
        if (head == "#t") throw UnsupportedFeatureError("continuous effect (#t)");
        e.kind = ExprTemplate::Kind::Fluent;
        e.fluent = head;
        for (std::size_t i = 1; i < node.items.size(); ++i)
            e.args.push_back(node.items[i].text);
        return e;
    }

    bool is_param_or_object(const Sexp& node) {
        return node.atom && (node.text.empty() || node.text[0] == '?' ||
                             !std::isdigit(static_cast<unsigned char>(node.text[0])));
    }

    // Parses one goal-description conjunct into `cond`, routing parameter
    // (in)equalities to the schema's static constraints.
    void parse_gd(const Sexp& node, ConditionTemplate& cond, ActionSchema& schema,
                  bool positive = true) {
        reject_if_unsupported(node);
        if (node.atom) throw SyntaxError("unexpected atom in condition", node.line);
        const std::string& head = node.head();
        if (head == "and") {
            if (!positive) throw UnsupportedFeatureError("negated conjunction");
            for (std::size_t i = 1; i < node.items.size(); ++i)
                parse_gd(node.items[i], cond, schema, true);
            return;
        }
        if (head == "not") {
            parse_gd(node.items.at(1), cond, schema, !positive);
            return;
        }
        if (head == "=" && node.items.size() == 3 && is_param_or_object(node.items[1]) &&
            is_param_or_object(node.items[2])) {
            schema.equalities.push_back(EqualityConstraint{node.items[1].text,
                                                           node.items[2].text, positive});
            return;
        }
        if (head == "<" || head == "<=" || head == "=" || head == ">=" || head == ">") {
            if (!positive) throw UnsupportedFeatureError("negated numeric comparison");
            ComparisonTemplate c;
            c.cmp = parse_comparator(head, node.line);
            c.lhs = parse_expr(node.items.at(1));
            c.rhs = parse_expr(node.items.at(2));
            cond.numerics.push_back(c);
            return;
        }
        cond.literals.push_back(parse_literal(node, positive));
    }

    void parse_timed_gd(const Sexp& node, ActionSchema& schema) {
        reject_if_unsupported(node);
        const std::string& head = node.head();
        if (head == "and") {
            for (std::size_t i = 1; i < node.items.size(); ++i)
                parse_timed_gd(node.items[i], schema);
            return;
        }
        TimeTag tag;
        const Sexp* body = nullptr;
        if (head == "at" && node.items.size() == 3 && node.items[1].atom &&
            (node.items[1].text == "start" || node.items[1].text == "end")) {
            tag = node.items[1].text == "start" ? TimeTag::AtStart : TimeTag::AtEnd;
            body = &node.items[2];
        } else if (head == "over" && node.items.size() == 3 && node.items[1].atom &&
                   node.items[1].text == "all") {
            tag = TimeTag::OverAll;
            body = &node.items[2];
        } else if (head == "=" || head == "not") {
            // bare static (in)equality, common planner shorthand
            ConditionTemplate scratch;
            scratch.timing = TimeTag::AtStart;
            parse_gd(node, scratch, schema);
            if (!scratch.literals.empty() || !scratch.numerics.empty())
                throw SyntaxError("untimed condition in durative action", node.line);
            return;
        } else {
            throw SyntaxError("durative conditions need at start/over all/at end",
                              node.line);
        }
        ConditionTemplate cond;
        cond.timing = tag;
        parse_gd(*body, cond, schema);
        if (!cond.literals.empty() || !cond.numerics.empty())
            schema.conditions.push_back(std::move(cond));
    }

    void parse_effect_body(const Sexp& node, EffectTemplate& eff) {
        reject_if_unsupported(node);
        const std::string& head = node.head();
        if (head == "and") {
            for (std::size_t i = 1; i < node.items.size(); ++i)
                parse_effect_body(node.items[i], eff);
            return;
        }
        if (head == "assign" || head == "increase" || head == "decrease") {
            NumericEffectTemplate ne;
            ne.op = head == "assign"     ? NumericOp::Assign
                    : head == "increase" ? NumericOp::Increase
                                         : NumericOp::Decrease;
            const Sexp& target = node.items.at(1);
            if (target.atom || target.items.empty())
                throw SyntaxError("numeric effect target must be a fluent", node.line);
            ne.fluent = target.items[0].text;
            for (std::size_t i = 1; i < target.items.size(); ++i)
                ne.args.push_back(target.items[i].text);
            ne.value = parse_expr(node.items.at(2));
            eff.numerics.push_back(std::move(ne));
            return;
        }
        if (head == "scale-up" || head == "scale-down")
            throw UnsupportedFeatureError(head);
        eff.props.push_back(PropEffectTemplate{parse_literal(node, true)});
    }

    void parse_timed_effect(const Sexp& node, ActionSchema& schema) {
        reject_if_unsupported(node);
        const std::string& head = node.head();
        if (head == "and") {
            for (std::size_t i = 1; i < node.items.size(); ++i)
                parse_timed_effect(node.items[i], schema);
            return;
        }
        if (head != "at" || node.items.size() != 3 || !node.items[1].atom ||
            (node.items[1].text != "start" && node.items[1].text != "end"))
            throw SyntaxError("durative effects need at start / at end", node.line);
        EffectTemplate eff;
        eff.timing = node.items[1].text == "start" ? TimeTag::AtStart : TimeTag::AtEnd;
        parse_effect_body(node.items[2], eff);
        if (!eff.props.empty() || !eff.numerics.empty())
            schema.effects.push_back(std::move(eff));
    }

    void parse_duration(const Sexp& node, ActionSchema& schema) {
        const std::string& head = node.head();
        if (head == "and") {
            for (std::size_t i = 1; i < node.items.size(); ++i)
                parse_duration(node.items[i], schema);
            return;
        }
        if (node.items.size() != 3 || !node.items[1].atom ||
            node.items[1].text != "?duration")
            throw SyntaxError("duration constraint must bound ?duration", node.line);
        ExprTemplate bound = parse_expr(node.items[2]);
        if (head == "=") {
            schema.dur_lb = bound;
            schema.dur_ub = bound;
            schema.dur_lb_set = schema.dur_ub_set = true;
        } else if (head == ">=" || head == ">") {
            schema.dur_lb = bound;
            schema.dur_lb_set = true;
        } else if (head == "<=" || head == "<") {
            schema.dur_ub = bound;
            schema.dur_ub_set = true;
        } else {
            throw SyntaxError("unknown duration constraint '" + head + "'", node.line);
        }
    }

    ActionSchema parse_durative(const Sexp& node) {
        ActionSchema schema;
        schema.durative = true;
        schema.name = node.items.at(1).text;
        for (std::size_t i = 2; i + 1 < node.items.size(); i += 2) {
            const std::string key = node.items[i].text;
            const Sexp& value = node.items[i + 1];
            if (key == ":parameters") {
                schema.params = parse_typed_list(value);
            } else if (key == ":duration") {
                parse_duration(value, schema);
            } else if (key == ":condition") {
                parse_timed_gd(value, schema);
            } else if (key == ":effect") {
                parse_timed_effect(value, schema);
            } else {
                throw SyntaxError("unexpected key '" + key + "'", node.items[i].line);
            }
        }
        if (!schema.dur_lb_set && !schema.dur_ub_set)
            throw SyntaxError("durative action '" + schema.name + "' needs :duration",
                              node.line);
        return schema;
    }

    ActionSchema parse_instantaneous(const Sexp& node) {
        ActionSchema schema;
        schema.durative = false;
        schema.name = node.items.at(1).text;
        for (std::size_t i = 2; i + 1 < node.items.size(); i += 2) {
            const std::string key = node.items[i].text;
            const Sexp& value = node.items[i + 1];
            if (key == ":parameters") {
                schema.params = parse_typed_list(value);
            } else if (key == ":precondition") {
                ConditionTemplate cond;
                cond.timing = TimeTag::Untimed;
                parse_gd(value, cond, schema);
                if (!cond.literals.empty() || !cond.numerics.empty())
                    schema.conditions.push_back(std::move(cond));
            } else if (key == ":effect") {
                EffectTemplate eff;
                eff.timing = TimeTag::Untimed;
                parse_effect_body(value, eff);
                schema.effects.push_back(std::move(eff));
            } else {
                throw SyntaxError("unexpected key '" + key + "'", node.items[i].line);
            }
        }
        return schema;
    }
};

// ---------------------------------------------------------------------------
// Problem parsing

struct ProblemFacts {
    std::string name;
    std::string domain_name;
    std::vector<ObjectDecl> objects;
    std::vector<LiteralTemplate> init_literals;
    std::vector<std::pair<ExprTemplate, double>> init_fluents;
    std::vector<std::tuple<double, LiteralTemplate>> timed_literals;
    const Sexp* goal = nullptr;
};

ProblemFacts parse_problem_sexp(const Sexp& root) {
    if (!root.is("define")) throw SyntaxError("expected (define ...)", root.line);
    ProblemFacts facts;
    for (std::size_t i = 1; i < root.items.size(); ++i) {
        const Sexp& section = root.items[i];
        if (section.is("problem")) {
            facts.name = section.items.at(1).text;
        } else if (section.is(":domain")) {
            facts.domain_name = section.items.at(1).text;
        } else if (section.is(":objects")) {
            for (const TypedVar& tv : parse_typed_list(section, 1))
                facts.objects.push_back(ObjectDecl{tv.name, tv.type});
        } else if (section.is(":init")) {
            for (std::size_t j = 1; j < section.items.size(); ++j) {
                const Sexp& fact = section.items[j];
                const std::string& head = fact.head();
                if (head == "=") {
                    ExprTemplate target;
                    const Sexp& tgt = fact.items.at(1);
                    if (tgt.atom || tgt.items.empty())
                        throw SyntaxError("init '=' needs a fluent", fact.line);
                    target.kind = ExprTemplate::Kind::Fluent;
                    target.fluent = tgt.items[0].text;
                    for (std::size_t k = 1; k < tgt.items.size(); ++k)
                        target.args.push_back(tgt.items[k].text);
                    double v = 0.0;
                    if (!fact.items.at(2).atom || !is_number(fact.items[2].text, v))
                        throw SyntaxError("init '=' needs a numeric value", fact.line);
                    facts.init_fluents.emplace_back(std::move(target), v);
                } else if (head == "at" && fact.items.size() == 3 &&
                           fact.items[1].atom) {
                    double t = 0.0;
                    if (!is_number(fact.items[1].text, t))
                        throw SyntaxError("timed literal needs a time", fact.line);
                    LiteralTemplate lit;
                    const Sexp& body = fact.items[2];
                    bool positive = true;
                    const Sexp* inner = &body;
                    if (body.is("not")) {
                        positive = false;
                        inner = &body.items.at(1);
                    }
                    lit.predicate = inner->head();
                    lit.positive = positive;
                    for (std::size_t k = 1; k < inner->items.size(); ++k)
                        lit.args.push_back(inner->items[k].text);
                    facts.timed_literals.emplace_back(t, std::move(lit));
                } else {
                    LiteralTemplate lit;
                    lit.predicate = head;
                    lit.positive = true;
                    for (std::size_t k = 1; k < fact.items.size(); ++k)
                        lit.args.push_back(fact.items[k].text);
                    facts.init_literals.push_back(std::move(lit));
                }
            }
        } else if (section.is(":goal")) {
            facts.goal = &section.items.at(1);
        } else if (section.is(":metric")) {
            throw UnsupportedFeatureError(":metric");
        } else {
            throw SyntaxError("unexpected section '" + section.head() + "'",
                              section.line);
        }
    }
    return facts;
}

// ---------------------------------------------------------------------------
// Grounding

class Grounder {
public:
    Grounder(Domain domain, ProblemFacts facts)
        : domain_(std::move(domain)), facts_(std::move(facts)) {}

    PlanningProblem ground() {
        PlanningProblem out;
        out.domain_name = domain_.name;
        out.problem_name = facts_.name;
        for (const ObjectDecl& c : domain_.constants) objects_.push_back(c);
        for (const ObjectDecl& o : facts_.objects) objects_.push_back(o);
        out.objects = objects_;
        for (const ObjectDecl& o : objects_) {
            if (!domain_.type_parent.count(o.type))
                throw GroundingError("object '" + o.name + "' has unknown type '" +
                                     o.type + "'");
            object_type_[o.name] = o.type;
        }

        // Universe of grounded atoms and fluents.
        for (const Schema& p : domain_.predicates)
            for (auto& args : enumerate_args(p.param_types))
                intern_prop(out, ground_name(p.name, args));
        for (const Schema& f : domain_.functions)
            for (auto& args : enumerate_args(f.param_types))
                intern_fluent(out, ground_name(f.name, args));

        out.initial.props.assign(out.propositions.size(), false);
        out.initial.fluents.assign(out.fluents.size(), 0.0);
        for (const LiteralTemplate& lit : facts_.init_literals) {
            const PropId id = lookup_prop(out, ground_name(lit.predicate, lit.args));
            out.initial.props[id] = true;
        }
        for (const auto& [target, value] : facts_.init_fluents) {
            const FluentId id = lookup_fluent(out, ground_name(target.fluent, target.args));
            out.initial.fluents[id] = value;
        }
        for (const auto& [time, lit] : facts_.timed_literals) {
            const PropId id = lookup_prop(out, ground_name(lit.predicate, lit.args));
            out.timed_literals.push_back(TimedLiteral{time, id, lit.positive});
        }
        std::sort(out.timed_literals.begin(), out.timed_literals.end(),
                  [](const TimedLiteral& a, const TimedLiteral& b) {
                      return a.time < b.time;
                  });

        // Fluents some action writes cannot anchor static durations.
        std::set<std::string> written;
        for (const ActionSchema& schema : domain_.actions)
            for (const EffectTemplate& eff : schema.effects)
                for (const NumericEffectTemplate& ne : eff.numerics)
                    written.insert(ne.fluent);

        for (const ActionSchema& schema : domain_.actions)
            ground_action(out, schema, written);

        if (facts_.goal != nullptr) {
            ConditionTemplate goal_cond;
            parse_goal(*facts_.goal, goal_cond);
            out.goal = instantiate_condition(out, goal_cond, {}, {});
            out.goal.timing = TimeTag::Untimed;
        }
        out.finalize();
        return out;
    }

private:
    // The goal uses the same grammar as action preconditions, without
    // parameters.
    void parse_goal(const Sexp& node, ConditionTemplate& cond) {
        reject_if_unsupported(node);
        const std::string& head = node.head();
        if (head == "and") {
            for (std::size_t i = 1; i < node.items.size(); ++i)
                parse_goal(node.items[i], cond);
            return;
        }
        if (head == "<" || head == "<=" || head == ">=" || head == ">" ||
            (head == "=" && !node.items.at(1).atom)) {
            ComparisonTemplate c;
            c.cmp = parse_comparator(head, node.line);
            c.lhs = parse_goal_expr(node.items.at(1));
            c.rhs = parse_goal_expr(node.items.at(2));
            cond.numerics.push_back(c);
            return;
        }
        cond.literals.push_back(parse_goal_literal(node, true));
    }

    LiteralTemplate parse_goal_literal(const Sexp& node, bool positive) {
        reject_if_unsupported(node);
        if (node.is("not")) return parse_goal_literal(node.items.at(1), !positive);
        LiteralTemplate lit;
        lit.predicate = node.head();
        lit.positive = positive;
        for (std::size_t i = 1; i < node.items.size(); ++i)
            lit.args.push_back(node.items[i].text);
        return lit;
    }

    ExprTemplate parse_goal_expr(const Sexp& node) {
        ExprTemplate e;
        if (node.atom) {
            double v = 0.0;
            if (!is_number(node.text, v))
                throw SyntaxError("expected a number", node.line);
            e.constant = v;
            return e;
        }
        const std::string& head = node.head();
        if (head == "+" || head == "-" || head == "*" || head == "/") {
            e.kind = head == "+"   ? ExprTemplate::Kind::Add
                     : head == "-" ? ExprTemplate::Kind::Sub
                     : head == "*" ? ExprTemplate::Kind::Mul
                                   : ExprTemplate::Kind::Div;
            e.children.push_back(parse_goal_expr(node.items.at(1)));
            e.children.push_back(parse_goal_expr(node.items.at(2)));
            return e;
        }
        e.kind = ExprTemplate::Kind::Fluent;
        e.fluent = head;
        for (std::size_t i = 1; i < node.items.size(); ++i)
            e.args.push_back(node.items[i].text);
        return e;
    }

    bool is_subtype(const std::string& type, const std::string& ancestor) const {
        std::string t = type;
        while (true) {
            if (t == ancestor) return true;
            auto it = domain_.type_parent.find(t);
            if (it == domain_.type_parent.end() || it->second.empty()) return false;
            t = it->second;
        }
    }

    std::vector<std::string> objects_of_type(const std::string& type) const {
        std::vector<std::string> out;
        for (const ObjectDecl& o : objects_)
            if (is_subtype(o.type, type)) out.push_back(o.name);
        return out;
    }

    std::vector<std::vector<std::string>> enumerate_args(
        const std::vector<std::string>& types) const {
        std::vector<std::vector<std::string>> out;
        std::vector<std::string> current;
        enumerate_rec(types, 0, current, out);
        return out;
    }

    void enumerate_rec(const std::vector<std::string>& types, std::size_t i,
                       std::vector<std::string>& current,
                       std::vector<std::vector<std::string>>& out) const {
        if (i == types.size()) {
            out.push_back(current);
            return;
        }
        for (const std::string& obj : objects_of_type(types[i])) {
            current.push_back(obj);
            enumerate_rec(types, i + 1, current, out);
            current.pop_back();
        }
    }

    static std::string ground_name(const std::string& head,
                                   const std::vector<std::string>& args) {
        std::string out = head;
        for (const std::string& a : args) {
            out += ' ';
            out += a;
        }
        return out;
    }

    void intern_prop(PlanningProblem& out, const std::string& name) {
        if (prop_ids_.count(name)) return;
        prop_ids_[name] = static_cast<PropId>(out.propositions.size());
        out.propositions.push_back(name);
    }

    void intern_fluent(PlanningProblem& out, const std::string& name) {
        if (fluent_ids_.count(name)) return;
        fluent_ids_[name] = static_cast<FluentId>(out.fluents.size());
        out.fluents.push_back(name);
    }

    PropId lookup_prop(const PlanningProblem& out, const std::string& name) const {
        auto it = prop_ids_.find(name);
        if (it == prop_ids_.end())
            throw GroundingError("unknown proposition '" + name + "'");
        (void)out;
        return it->second;
    }

    FluentId lookup_fluent(const PlanningProblem& out, const std::string& name) const {
        auto it = fluent_ids_.find(name);
        if (it == fluent_ids_.end())
            throw GroundingError("unknown fluent '" + name + "'");
        (void)out;
        return it->second;
    }

    using Bindings = std::map<std::string, std::string>;

    std::string resolve(const std::string& token, const Bindings& bindings) const {
        if (!token.empty() && token[0] == '?') {
            auto it = bindings.find(token);
            if (it == bindings.end())
                throw GroundingError("unbound variable '" + token + "'");
            return it->second;
        }
        return token;
    }

    FluentExpr instantiate_expr(const PlanningProblem& out, const ExprTemplate& t,
                                const Bindings& bindings) const {
        switch (t.kind) {
        case ExprTemplate::Kind::Constant:
            return FluentExpr::make_constant(t.constant);
        case ExprTemplate::Kind::Fluent: {
            std::vector<std::string> args;
            for (const std::string& a : t.args) args.push_back(resolve(a, bindings));
            return FluentExpr::make_fluent(lookup_fluent(out, ground_name(t.fluent, args)));
        }
        case ExprTemplate::Kind::Add:
        case ExprTemplate::Kind::Sub:
        case ExprTemplate::Kind::Mul:
        case ExprTemplate::Kind::Div: {
            auto kind = t.kind == ExprTemplate::Kind::Add   ? FluentExpr::Kind::Add
                        : t.kind == ExprTemplate::Kind::Sub ? FluentExpr::Kind::Sub
                        : t.kind == ExprTemplate::Kind::Mul ? FluentExpr::Kind::Mul
                                                            : FluentExpr::Kind::Div;
            return FluentExpr::make_binary(kind,
                                           instantiate_expr(out, t.children[0], bindings),
                                           instantiate_expr(out, t.children[1], bindings));
        }
        }
        return FluentExpr::make_constant(0.0);
    }

    Condition instantiate_condition(const PlanningProblem& out,
                                    const ConditionTemplate& t, const Bindings& bindings,
                                    const std::vector<TypedVar>& params) const {
        (void)params;
        Condition cond;
        cond.timing = t.timing;
        for (const LiteralTemplate& lit : t.literals) {
            std::vector<std::string> args;
            for (const std::string& a : lit.args) args.push_back(resolve(a, bindings));
            cond.literals.push_back(Literal{
                lookup_prop(out, ground_name(lit.predicate, args)), lit.positive});
        }
        for (const ComparisonTemplate& c : t.numerics) {
            NumericComparison nc;
            nc.cmp = c.cmp;
            nc.lhs = instantiate_expr(out, c.lhs, bindings);
            nc.rhs = instantiate_expr(out, c.rhs, bindings);
            cond.numerics.push_back(std::move(nc));
        }
        return cond;
    }

    Effect instantiate_effect(const PlanningProblem& out, const EffectTemplate& t,
                              const Bindings& bindings) const {
        Effect eff;
        eff.timing = t.timing;
        for (const PropEffectTemplate& pe : t.props) {
            std::vector<std::string> args;
            for (const std::string& a : pe.lit.args) args.push_back(resolve(a, bindings));
            eff.props.push_back(PropEffect{
                lookup_prop(out, ground_name(pe.lit.predicate, args)),
                pe.lit.positive ? 1.0 : 0.0});
        }
        for (const NumericEffectTemplate& ne : t.numerics) {
            std::vector<std::string> args;
            for (const std::string& a : ne.args) args.push_back(resolve(a, bindings));
            eff.numerics.push_back(NumericEffect{
                lookup_fluent(out, ground_name(ne.fluent, args)), ne.op,
                instantiate_expr(out, ne.value, bindings)});
        }
        return eff;
    }

    void ground_action(PlanningProblem& out, const ActionSchema& schema,
                       const std::set<std::string>& written_fluents) {
        std::vector<std::string> types;
        for (const TypedVar& p : schema.params) types.push_back(p.type);
        for (const auto& args : enumerate_args(types)) {
            Bindings bindings;
            for (std::size_t i = 0; i < schema.params.size(); ++i)
                bindings[schema.params[i].name] = args[i];

            bool admissible = true;
            for (const EqualityConstraint& eq : schema.equalities) {
                const std::string a = resolve(eq.a, bindings);
                const std::string b = resolve(eq.b, bindings);
                if ((a == b) != eq.must_equal) {
                    admissible = false;
                    break;
                }
            }
            if (!admissible) continue;

            const std::string id = ground_name(schema.name, args);
            if (schema.durative) {
                DurativeAction action;
                action.id = id;
                for (const ConditionTemplate& c : schema.conditions)
                    action.conditions.push_back(
                        instantiate_condition(out, c, bindings, schema.params));
                for (const EffectTemplate& e : schema.effects)
                    action.effects.push_back(instantiate_effect(out, e, bindings));

                // Static duration bounds are evaluated now; durations over
                // written fluents fall back to the plan's prescribed value.
                bool dyn = false;
                auto eval_bound = [&](const ExprTemplate& t, bool set,
                                      double fallback) -> double {
                    if (!set) return fallback;
                    if (references_written(t, written_fluents)) {
                        dyn = true;
                        return fallback;
                    }
                    const FluentExpr e = instantiate_expr(out, t, bindings);
                    return e.evaluate(out.initial.fluents);
                };
                action.duration.lb = eval_bound(schema.dur_lb, schema.dur_lb_set, 0.0);
                action.duration.ub = eval_bound(schema.dur_ub, schema.dur_ub_set, kInf);
                action.duration_is_dynamic = dyn;
                if (!dyn && action.duration.lb > action.duration.ub)
                    throw GroundingError("action '" + id + "' has an empty duration");
                out.actions.push_back(std::move(action));
            } else {
                InstantaneousAction action;
                action.id = id;
                Condition merged;
                merged.timing = TimeTag::Untimed;
                for (const ConditionTemplate& c : schema.conditions) {
                    Condition inst = instantiate_condition(out, c, bindings, schema.params);
                    merged.literals.insert(merged.literals.end(), inst.literals.begin(),
                                           inst.literals.end());
                    merged.numerics.insert(merged.numerics.end(), inst.numerics.begin(),
                                           inst.numerics.end());
                }
                action.precondition = std::move(merged);
                Effect eff;
                eff.timing = TimeTag::Untimed;
                for (const EffectTemplate& e : schema.effects) {
                    Effect inst = instantiate_effect(out, e, bindings);
                    eff.props.insert(eff.props.end(), inst.props.begin(),
                                     inst.props.end());
                    eff.numerics.insert(eff.numerics.end(), inst.numerics.begin(),
                                        inst.numerics.end());
                }
                action.effect = std::move(eff);
                out.actions.push_back(std::move(action));
            }
        }
    }

    static bool references_written(const ExprTemplate& t,
                                   const std::set<std::string>& written) {
        switch (t.kind) {
        case ExprTemplate::Kind::Constant: return false;
        case ExprTemplate::Kind::Fluent: return written.count(t.fluent) > 0;
        default:
            return references_written(t.children[0], written) ||
                   references_written(t.children[1], written);
        }
    }

    Domain domain_;
    ProblemFacts facts_;
    std::vector<ObjectDecl> objects_;
    std::map<std::string, std::string> object_type_;
    std::map<std::string, PropId> prop_ids_;
    std::map<std::string, FluentId> fluent_ids_;
};

}  // namespace

PlanningProblem parse_domain_problem(const std::string& domain_text,
                                     const std::string& problem_text) {
    Lexer domain_lexer(domain_text);
    Sexp domain_root = domain_lexer.parse_all();
    if (domain_root.items.size() != 1)
        throw SyntaxError("expected exactly one (define ...) in the domain", 1);
    DomainParser parser;
    Domain domain = parser.parse(domain_root.items[0]);

    Lexer problem_lexer(problem_text);
    Sexp problem_root = problem_lexer.parse_all();
    if (problem_root.items.size() != 1)
        throw SyntaxError("expected exactly one (define ...) in the problem", 1);
    ProblemFacts facts = parse_problem_sexp(problem_root.items[0]);
    if (!facts.domain_name.empty() && facts.domain_name != domain.name)
        throw GroundingError("problem requires domain '" + facts.domain_name +
                             "' but got '" + domain.name + "'");
    Grounder grounder(std::move(domain), std::move(facts));
    return grounder.ground();
}

namespace {

void write_expr(std::string& out, const FluentExpr& e, const PlanningProblem& p) {
    switch (e.kind) {
    case FluentExpr::Kind::Constant:
        out += format_double(e.constant);
        return;
    case FluentExpr::Kind::FluentRef:
        out += '(';
        out += p.fluents[e.fluent];
        out += ')';
        return;
    default: {
        const char* op = e.kind == FluentExpr::Kind::Add   ? "+"
                         : e.kind == FluentExpr::Kind::Sub ? "-"
                         : e.kind == FluentExpr::Kind::Mul ? "*"
                                                           : "/";
        out += '(';
        out += op;
        out += ' ';
        write_expr(out, *e.lhs, p);
        out += ' ';
        write_expr(out, *e.rhs, p);
        out += ')';
    }
    }
}

const char* comparator_token(Comparator c) {
    switch (c) {
    case Comparator::Less: return "<";
    case Comparator::LessEq: return "<=";
    case Comparator::Eq: return "=";
    case Comparator::GreaterEq: return ">=";
    case Comparator::Greater: return ">";
    }
    return "=";
}

}  // namespace

std::string write_problem_pddl(const PlanningProblem& problem, const CrispState& init,
                               const std::vector<TimedLiteral>& timed_literals,
                               const std::string& problem_name) {
    std::string out;
    out += "(define (problem " + problem_name + ")\n";
    out += "  (:domain " + problem.domain_name + ")\n";
    out += "  (:objects";
    for (const ObjectDecl& o : problem.objects)
        out += "\n    " + o.name + " - " + o.type;
    out += ")\n";
    out += "  (:init";
    for (PropId p = 0; p < problem.propositions.size(); ++p)
        if (init.props[p]) out += "\n    (" + problem.propositions[p] + ")";
    for (FluentId f = 0; f < problem.fluents.size(); ++f)
        out += "\n    (= (" + problem.fluents[f] + ") " +
               format_double(init.fluents[f]) + ")";
    for (const TimedLiteral& til : timed_literals) {
        out += "\n    (at " + format_double(til.time) + " ";
        if (til.value)
            out += "(" + problem.propositions[til.prop] + ")";
        else
            out += "(not (" + problem.propositions[til.prop] + "))";
        out += ")";
    }
    out += ")\n";
    out += "  (:goal (and";
    for (const Literal& lit : problem.goal.literals) {
        if (lit.positive)
            out += "\n    (" + problem.propositions[lit.prop] + ")";
        else
            out += "\n    (not (" + problem.propositions[lit.prop] + "))";
    }
    for (const NumericComparison& c : problem.goal.numerics) {
        out += "\n    (";
        out += comparator_token(c.cmp);
        out += ' ';
        write_expr(out, c.lhs, problem);
        out += ' ';
        write_expr(out, c.rhs, problem);
        out += ')';
    }
    out += ")))\n";
    return out;
}

}  // namespace planex
