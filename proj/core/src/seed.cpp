#include "ctxk/seed.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <random>

#include "ctxk/error.hpp"

namespace ctxk::bench {

namespace fs = std::filesystem;

namespace {

struct SeedFile {
  const char* domain;
  const char* path;
  const char* author;
  const char* timestamp;
  const char* sensitivity;
  double authority;
  std::vector<std::string> entities;
  const char* content;
};

struct DomainSource {
  const char* domain;
  const char* source;
  SourceType type;
};

const std::vector<DomainSource>& domain_sources() {
  static const std::vector<DomainSource> v = {
      {"clients", "accounts", SourceType::file_system},
      {"sales", "pipeline", SourceType::git_repo},
      {"delivery", "projects", SourceType::file_system},
      {"hr", "people", SourceType::file_system},
      {"finance", "ledger", SourceType::file_system},
  };
  return v;
}

const char* source_of(std::string_view domain) {
  for (const auto& d : domain_sources()) {
    if (domain == d.domain) return d.source;
  }
  throw Error(errc::kUnknownDomain, std::string(domain));
}

const std::vector<SeedFile>& seed_files() {
  static const std::vector<SeedFile> v = {
      {"clients", "henderson/profile.md", "alice", "2026-02-20T10:00:00Z", "internal", 0.9,
       {"Henderson"},
       "# Henderson Manufacturing: client profile\n\n"
       "Henderson Manufacturing is our largest client account, a regional industrial firm with headquarters in "
       "Leeds and three plants. The relationship started in 2023 with an operations assessment and grew into the "
       "Atlas modernisation programme.\n\n"
       "Key stakeholders and contacts: Maria Okafor (COO, executive sponsor), Tom Reyes (procurement lead), "
       "Priya Shah (head of IT). Decisions above 50k need sign-off from the executive sponsor.\n\n"
       "Account history: two successful engagements, one escalation in 2025 about reporting quality that was "
       "resolved. Client satisfaction score 8.4 of 10. The customer values weekly written updates and dislikes "
       "surprises on cost.\n"},
      {"clients", "crestline/contacts.md", "carol", "2026-01-12T09:30:00Z", "internal", 0.6,
       {"Crestline"},
       "# Crestline Logistics: contacts\n\n"
       "Primary contact: Daniel Voss, logistics director, daniel.voss@crestline.example, +44 20 7946 0112.\n"
       "Secondary contact: Hana Ito, finance controller, hana.ito@crestline.example.\n\n"
       "Relationship notes: the client terminated the framework agreement in December; the contacts list is "
       "kept for reference only. Do not reach out to Crestline stakeholders without partner approval.\n"},
      {"clients", "brightwater/account-notes.md", "judy", "2025-11-03T14:00:00Z", "internal", 0.5,
       {"Brightwater"},
       "# Brightwater Foods: account notes\n\n"
       "Brightwater is a food distribution customer onboarded in 2024. The account churned at the end of the "
       "last contract; the client moved to an in-house team. Outstanding items: final satisfaction survey and "
       "archive of shared documents. Stakeholders: Lena Brandt (former sponsor).\n\n"
       "Account history: one discovery project, one pilot; no open opportunities.\n"},
      {"sales", "clients/henderson/deal-status.md", "bob", "2026-03-10T16:45:00Z", "confidential", 0.8,
       {"Henderson", "Atlas"},
       "# Henderson renewal: deal status\n\n"
       "Stage: negotiation. The Henderson renewal opportunity covers Atlas phase two plus a managed service "
       "retainer, total value 420k over 18 months. Proposal v3 sent on 2026-03-04 with a 7 percent volume "
       "discount on the rate card.\n\n"
       "Decision maker: Maria Okafor. Procurement (Tom Reyes) is pushing for a further discount. Forecast "
       "close: end of April, probability 70 percent. Pipeline risk: budget approval on the client side.\n\n"
       "Next steps: pricing call on 2026-03-18, revised proposal if the discount changes.\n"},
      {"sales", "pricing/rate-card.md", "alice", "2026-01-05T09:00:00Z", "confidential", 1.0,
       {},
       "# Rate card 2026\n\n"
       "Standard day rates: partner 2,100; principal 1,650; senior consultant 1,250; consultant 950; analyst "
       "700. Rates are in GBP, excluding VAT.\n\n"
       "Pricing rules: fixed-fee proposals carry a 15 percent risk premium over the day rate estimate. Volume "
       "discounts: up to 5 percent at the sales rep's discretion, up to 10 percent with sales manager approval, "
       "anything above needs partner sign-off. Never quote below the floor rate of 600.\n"},
      {"delivery", "projects/atlas/status.md", "dan", "2026-03-02T08:00:00Z", "internal", 0.8,
       {"Atlas", "Henderson"},
       "# Atlas programme: status report\n\n"
       "Overall status: on track. Phase one milestones complete: data migration and the new planning module "
       "are live at two Henderson plants. The rollout at the third plant is scheduled for May.\n\n"
       "Open blockers: none critical. Minor risk on integration testing capacity. Budget burn at 48 percent "
       "against 50 percent of the schedule.\n"},
      {"delivery", "projects/atlas/plan.md", "dan", "2026-02-15T11:00:00Z", "internal", 0.7,
       {"Atlas", "Henderson"},
       "# Atlas programme: project plan\n\n"
       "Scope: modernise production planning across three Henderson plants in three phases.\n"
       "Phase one (Jan to Mar): data migration, planning module. Phase two (Apr to Jul): scheduling optimiser, "
       "third plant rollout. Phase three (Aug to Oct): analytics and handover.\n\n"
       "Workstreams and staffing: data (Erin, two analysts), platform (one principal, two consultants), change "
       "management (one senior consultant). Next milestone: phase two kickoff on 2026-04-06. Deliverables are "
       "reviewed with the client sponsor at each phase gate.\n"},
      {"hr", "salaries/compensation.md", "frank", "2026-01-20T10:00:00Z", "confidential", 1.0,
       {},
       "# Compensation bands 2026\n\n"
       "Salary bands: analyst 42k to 50k; consultant 55k to 68k; senior consultant 72k to 88k; principal 95k to "
       "115k; partner by agreement. Annual bonus up to 15 percent of base salary, based on firm results and the "
       "individual performance rating. Compensation changes take effect on 1 April after the review cycle. "
       "Promotion moves an employee to the bottom of the next band at minimum.\n"},
      {"hr", "policies/leave-policy.md", "grace", "2025-09-01T09:00:00Z", "internal", 0.9,
       {},
       "# Leave policy\n\n"
       "Every employee receives 25 days of annual leave plus public holidays. Up to 5 unused vacation days can "
       "be carried over to the next year. Parental leave: 26 weeks at full pay for the primary carer, 6 weeks "
       "for the secondary carer. Sick leave is self-certified for up to 5 days. Leave requests go through the "
       "HR portal at least two weeks in advance.\n"},
      {"hr", "reviews/performance-cycle.md", "frank", "2026-02-01T09:00:00Z", "internal", 0.8,
       {},
       "# Performance review cycle\n\n"
       "The annual performance review cycle starts on 1 March. Employees complete a self appraisal, collect "
       "feedback from two peers and meet their reviewer. Calibration in mid March sets ratings and promotion "
       "recommendations. Promotions are decided by the partner group based on calibrated ratings and business "
       "need. Outcomes are communicated by 25 March.\n"},
      {"finance", "invoices/henderson-invoices.md", "ivan", "2026-03-08T15:00:00Z", "confidential", 0.9,
       {"Henderson"},
       "# Henderson invoices\n\n"
       "INV-2026-014: 62,500 billed 2026-01-31, paid.\n"
       "INV-2026-027: 64,000 billed 2026-02-28, outstanding, due 2026-03-30.\n"
       "INV-2025-198: 18,200 billed 2025-12-15, overdue by 53 days, reminder sent.\n\n"
       "Total billed this quarter: 126,500. Receivables outstanding: 82,200. Payment terms: 30 days.\n"},
      {"finance", "budget/fy2026-budget.md", "heidi", "2025-12-20T12:00:00Z", "confidential", 1.0,
       {},
       "# FY2026 budget\n\n"
       "Revenue target 4.2m, target margin 28 percent. Expense budget: salaries 2.3m, travel 140k, software "
       "licences 85k, office 160k, training 60k. Spend to date (end of February): 19 percent of the annual "
       "expense budget. Quarterly budget review with the partners; any cost overrun above 10 percent of a line "
       "needs finance manager approval.\n"},
  };
  return v;
}

// Replacement content for the freshness scenarios.
constexpr const char* kRateCardV2 =
    "# Rate card 2026 (revised March)\n\n"
    "Standard day rates: partner 2,250; principal 1,750; senior consultant 1,350; consultant 1,000; analyst "
    "740. Rates are in GBP, excluding VAT. The revised pricing applies to all proposals sent after 2026-03-15.\n\n"
    "Pricing rules: fixed-fee proposals carry a 15 percent risk premium. Volume discounts: up to 5 percent at "
    "the sales rep's discretion, up to 10 percent with sales manager approval.\n";

constexpr const char* kAtlasAtRisk =
    "# Atlas programme: status report\n\n"
    "Overall status: at risk. The third plant rollout slipped after the integration tests failed; the May "
    "milestone is unlikely to hold. Blockers: vendor interface defects, two consultants unavailable in April. "
    "Budget burn at 61 percent against 55 percent of the schedule.\n";

using Keywords = std::vector<std::string>;

const std::map<std::string, Keywords>& taxonomy_keywords() {
  static const std::map<std::string, Keywords> t = {
      {"clients",
       {"client", "clients", "account", "accounts", "profile", "profiles", "contact", "contacts", "relationship",
        "relationships", "stakeholder", "stakeholders", "customer", "customers", "churn", "churned", "onboarding",
        "satisfaction", "escalation", "escalations", "history", "industry", "headquarters", "sponsor", "sponsors",
        "notes"}},
      {"sales",
       {"deal", "deals", "pipeline", "pricing", "price", "prices", "rate", "rates", "card", "proposal",
        "proposals", "discount", "discounts", "quote", "quoted", "opportunity", "opportunities", "negotiation",
        "renewal", "renewals", "forecast", "prospect", "prospects", "bid", "bids", "stage", "closing",
        "commission"}},
      {"delivery",
       {"project", "projects", "status", "milestone", "milestones", "timeline", "timelines", "plan", "plans",
        "risk", "risks", "deliverable", "deliverables", "sprint", "sprints", "schedule", "staffing", "staffed",
        "scope", "workstream", "workstreams", "blocker", "blockers", "rollout", "launch", "phase", "phases"}},
      {"hr",
       {"salary", "salaries", "compensation", "leave", "vacation", "holiday", "holidays", "policy", "policies",
        "review", "reviews", "performance", "hiring", "hire", "employee", "employees", "benefits", "bonus",
        "bonuses", "promotion", "promotions", "headcount", "appraisal", "appraisals", "parental", "sick", "band",
        "bands"}},
      {"finance",
       {"invoice", "invoices", "budget", "budgets", "payment", "payments", "revenue", "expense", "expenses",
        "cost", "costs", "billing", "billed", "receivable", "receivables", "overdue", "outstanding", "margin",
        "margins", "spend", "spent", "fiscal", "fy2026", "quarter", "quarterly", "cash", "ledger", "accruals"}},
      {"operations",
       {"office", "offices", "laptop", "laptops", "equipment", "vendor", "vendors", "facilities", "travel",
        "booking", "bookings", "software", "license", "licenses", "security", "badge", "badges", "printer",
        "network", "wifi", "supplies", "procurement", "onsite", "desk", "desks", "parking"}},
      {"general",
       {"company", "firm", "team", "teams", "meeting", "meetings", "announcement", "announcements", "calendar",
        "event", "events", "newsletter", "culture", "mission", "values", "strategy", "update", "updates", "news",
        "question", "questions", "help", "info", "information", "overview", "summary", "latest"}},
  };
  return t;
}

struct OrgRoleDef {
  const char* role;
  std::vector<std::string> operations;
  const char* dropped_for_agent;
  std::map<std::string, Tier> tiers;
};

const std::vector<OrgRoleDef>& role_defs() {
  static const std::vector<OrgRoleDef> v = {
      {"sales-manager",
       {"read-context", "write-context", "send-internal-msg", "send-external-email", "commit-to-pricing",
        "approve-discount"},
       "approve-discount",
       {{"approve-discount", Tier::soft_approval}}},
      {"sales-rep",
       {"read-context", "write-context", "send-internal-msg", "send-external-email", "commit-to-pricing"},
       "commit-to-pricing",
       {}},
      {"delivery-lead",
       {"read-context", "write-context", "send-internal-msg", "send-external-email", "update-timeline"},
       "update-timeline",
       {}},
      {"consultant", {"read-context", "write-context", "send-internal-msg"}, "send-internal-msg", {}},
      {"hr-manager", {"read-context", "write-context", "send-internal-msg", "update-salary"}, "update-salary",
       {{"update-salary", Tier::soft_approval}}},
      {"hr-generalist", {"read-context", "send-internal-msg"}, "send-internal-msg", {}},
      {"finance-manager", {"read-context", "write-context", "send-internal-msg", "approve-invoice"},
       "approve-invoice",
       {}},
      {"accountant", {"read-context", "write-context", "send-internal-msg"}, "send-internal-msg", {}},
      {"partner",
       {"read-context", "write-context", "send-internal-msg", "send-external-email", "sign-contract"},
       "sign-contract",
       {{"sign-contract", Tier::strong_approval}}},
  };
  return v;
}

const std::vector<OrgUser>& org_users() {
  static const std::vector<OrgUser> v = {
      {"alice", "sales-manager", {}, "sales"},
      {"bob", "sales-rep", {"henderson"}, "sales"},
      {"carol", "sales-rep", {"crestline"}, "sales"},
      {"dan", "delivery-lead", {}, "delivery"},
      {"erin", "consultant", {"atlas", "henderson"}, "delivery"},
      {"frank", "hr-manager", {}, "hr"},
      {"grace", "hr-generalist", {}, "hr"},
      {"heidi", "finance-manager", {}, "finance"},
      {"ivan", "accountant", {}, "finance"},
      {"judy", "partner", {}, "clients"},
  };
  return v;
}

OrgSpec build_org() {
  OrgSpec org;
  for (const auto& r : role_defs()) {
    UserRole role;
    role.role = r.role;
    role.read_paths = {"*"};
    role.write_paths = {"*"};
    role.operations = {r.operations.begin(), r.operations.end()};
    role.tier_of = r.tiers;
    org.roles.push_back(std::move(role));
  }
  for (const auto& u : org_users()) {
    org.users.push_back(u);
    const auto& def = *std::find_if(role_defs().begin(), role_defs().end(),
                                    [&](const OrgRoleDef& r) { return u.role == r.role; });
    AgentProfile p;
    p.agent_id = u.user + "-agent";
    p.user = u.user;
    p.role = u.role;
    for (const auto& op : def.operations) {
      if (op != def.dropped_for_agent) p.operations.insert(op);
    }
    const std::string write_op(kWriteContext);
    if (p.operations.count(write_op)) p.tier_of[write_op] = Tier::soft_approval;
    for (const auto& [op, t] : def.tiers) {
      if (p.operations.count(op)) p.tier_of[op] = t;
    }
    org.agents.push_back(std::move(p));
  }
  return org;
}

RoleAccess ra(const char* role, std::vector<std::string> read, std::vector<std::string> write = {}) {
  return RoleAccess{role, std::move(read), std::move(write)};
}

SourceSpec make_source(const DomainSource& d, Minutes interval, bool realtime = false) {
  SourceSpec s;
  s.name = d.source;
  s.type = d.type;
  s.config[d.type == SourceType::git_repo ? "repo" : "root"] = std::string("sources/") + d.domain;
  s.refresh = Refresh{realtime, interval};
  return s;
}

std::vector<DomainManifest> build_manifests() {
  using std::chrono::hours;
  auto base = [](const char* name, Minutes refresh) {
    DomainManifest m;
    m.name = name;
    m.ns = "firm";
    m.labels = {{"team", name}};
    for (const auto& d : domain_sources()) {
      if (std::string_view(d.domain) == name) m.sources.push_back(make_source(d, refresh));
    }
    m.freshness.defaults = FreshnessPolicy{Minutes(hours(24)), StaleAction::flag};
    return m;
  };

  DomainManifest clients = base("clients", Minutes(15));
  clients.access.roles = {ra("sales-manager", {"*"}),        ra("sales-rep", {"${assigned}/*"}),
                          ra("delivery-lead", {"*"}),        ra("consultant", {"${assigned}/*"}),
                          ra("finance-manager", {"*"}),      ra("partner", {"*"}, {"*"})};
  clients.access.cross_domain = {{"sales", CrossDomainMode::brokered},
                                 {"delivery", CrossDomainMode::brokered},
                                 {"hr", CrossDomainMode::denied}};

  DomainManifest sales = base("sales", Minutes(15));
  sales.access.roles = {ra("sales-manager", {"*"}, {"*"}),
                        ra("sales-rep", {"clients/${assigned}/*", "pricing/*"}, {"clients/${assigned}/*"}),
                        ra("delivery-lead", {"clients/*"}),
                        ra("finance-manager", {"pricing/*", "clients/*"}),
                        ra("partner", {"*"})};
  sales.access.agent.write_paths = {{"*/contracts/*", Tier::strong_approval},
                                    {"pricing/*", Tier::strong_approval}};
  sales.access.agent.execute = {{"send-internal-msg", Tier::soft_approval},
                                {"send-external-email", Tier::strong_approval},
                                {"commit-to-pricing", Tier::excluded}};
  sales.access.cross_domain = {{"clients", CrossDomainMode::brokered},
                               {"delivery", CrossDomainMode::brokered},
                               {"finance", CrossDomainMode::brokered},
                               {"hr", CrossDomainMode::denied}};
  sales.freshness.overrides = {{"pricing/*", FreshnessPolicy{Minutes(hours(24)), StaleAction::re_sync}}};

  DomainManifest delivery = base("delivery", Minutes(30));
  delivery.access.roles = {ra("delivery-lead", {"*"}, {"*"}),
                           ra("consultant", {"projects/${assigned}/*"}, {"projects/${assigned}/*"}),
                           ra("sales-manager", {"*"}), ra("partner", {"*"})};
  delivery.access.agent.execute = {{"send-external-email", Tier::strong_approval},
                                   {"update-timeline", Tier::soft_approval}};
  delivery.access.cross_domain = {{"clients", CrossDomainMode::brokered}, {"sales", CrossDomainMode::brokered}};

  DomainManifest hr = base("hr", Minutes(hours(24)));
  hr.access.roles = {ra("hr-manager", {"*"}, {"*"}), ra("hr-generalist", {"policies/*", "reviews/*"}, {"policies/*"})};
  hr.access.agent.write_default = Tier::strong_approval;
  hr.access.agent.execute = {{"update-salary", Tier::excluded}};
  hr.access.cross_domain = {{"sales", CrossDomainMode::denied}, {"finance", CrossDomainMode::denied}};
  hr.freshness.defaults = FreshnessPolicy{Minutes(hours(24 * 30)), StaleAction::flag};

  DomainManifest finance = base("finance", Minutes(60));
  finance.access.roles = {ra("finance-manager", {"*"}, {"*"}), ra("accountant", {"*"}, {"invoices/*"}),
                          ra("sales-manager", {"invoices/*"}), ra("partner", {"*"})};
  finance.access.agent.execute = {{"approve-invoice", Tier::strong_approval}};
  finance.access.cross_domain = {{"sales", CrossDomainMode::brokered}, {"clients", CrossDomainMode::brokered}};
  finance.freshness.defaults = FreshnessPolicy{Minutes(hours(24 * 7)), StaleAction::flag};

  return {clients, sales, delivery, hr, finance};
}

struct Template {
  const char* category;
  std::vector<const char*> users;
  const char* text;
  std::vector<const char*> labels;
  std::vector<std::pair<const char*, const char*>> truth;  // (domain, path)
};

const std::vector<Template>& templates() {
  static const std::vector<Template> v = {
      // sales
      {"sales", {"alice", "bob"}, "What stage is the Henderson deal at in the pipeline?", {"sales"},
       {{"sales", "clients/henderson/deal-status.md"}}},
      {"sales", {"alice", "bob"}, "What discount did we offer Henderson in the latest proposal?", {"sales"},
       {{"sales", "clients/henderson/deal-status.md"}}},
      {"sales", {"alice", "bob", "carol"}, "What are our standard day rates on the rate card?", {"sales"},
       {{"sales", "pricing/rate-card.md"}}},
      {"sales", {"alice", "bob", "carol"}, "How much do we charge for a senior consultant per day?", {"sales"},
       {{"sales", "pricing/rate-card.md"}}},
      {"sales", {"alice", "bob"}, "When is the Henderson renewal expected to close?", {"sales"},
       {{"sales", "clients/henderson/deal-status.md"}}},
      {"sales", {"alice", "bob", "carol"}, "Which pricing premium applies to fixed-fee proposals?", {"sales"},
       {{"sales", "pricing/rate-card.md"}}},
      {"sales", {"alice", "bob"}, "Show the forecast for open deals in the sales pipeline", {"sales"},
       {{"sales", "clients/henderson/deal-status.md"}}},
      {"sales", {"alice", "bob", "carol"}, "What volume discounts can a sales rep give without approval?",
       {"sales"}, {{"sales", "pricing/rate-card.md"}}},
      {"sales", {"alice", "bob"}, "Who is the decision maker on the Henderson opportunity?", {"sales"},
       {{"sales", "clients/henderson/deal-status.md"}}},
      {"sales", {"alice", "bob"}, "Anything new on Henderson this week?", {"sales"},
       {{"sales", "clients/henderson/deal-status.md"}}},
      // delivery
      {"delivery", {"dan", "erin"}, "What is the status of the Atlas project?", {"delivery"},
       {{"delivery", "projects/atlas/status.md"}}},
      {"delivery", {"dan", "erin"}, "Which milestones are at risk on Atlas?", {"delivery"},
       {{"delivery", "projects/atlas/status.md"}, {"delivery", "projects/atlas/plan.md"}}},
      {"delivery", {"dan", "erin"}, "What is the timeline for Atlas phase two?", {"delivery"},
       {{"delivery", "projects/atlas/plan.md"}}},
      {"delivery", {"dan", "erin"}, "Who is staffed on the Atlas workstreams?", {"delivery"},
       {{"delivery", "projects/atlas/plan.md"}}},
      {"delivery", {"dan", "erin"}, "List the open blockers for the Atlas rollout", {"delivery"},
       {{"delivery", "projects/atlas/status.md"}}},
      {"delivery", {"dan", "erin"}, "When is the next Atlas milestone due?", {"delivery"},
       {{"delivery", "projects/atlas/plan.md"}}},
      {"delivery", {"dan", "erin"}, "Summarize the project plan and scope for Atlas", {"delivery"},
       {{"delivery", "projects/atlas/plan.md"}}},
      {"delivery", {"dan", "erin"}, "Are we going to hit the third plant date?", {"delivery"},
       {{"delivery", "projects/atlas/status.md"}}},
      // hr
      {"hr", {"frank"}, "What is the salary band for senior consultants?", {"hr"},
       {{"hr", "salaries/compensation.md"}}},
      {"hr", {"frank"}, "How are annual bonuses calculated?", {"hr"}, {{"hr", "salaries/compensation.md"}}},
      {"hr", {"frank", "grace"}, "How many days of annual leave do employees get?", {"hr"},
       {{"hr", "policies/leave-policy.md"}}},
      {"hr", {"frank", "grace"}, "What is the parental leave policy?", {"hr"}, {{"hr", "policies/leave-policy.md"}}},
      {"hr", {"frank", "grace"}, "When does the performance review cycle start?", {"hr"},
       {{"hr", "reviews/performance-cycle.md"}}},
      {"hr", {"frank", "grace"}, "How are promotions decided in the appraisal process?", {"hr"},
       {{"hr", "reviews/performance-cycle.md"}}},
      {"hr", {"frank", "grace"}, "Can unused vacation days be carried over?", {"hr"},
       {{"hr", "policies/leave-policy.md"}}},
      {"hr", {"frank"}, "What compensation changes follow the performance review?", {"hr"},
       {{"hr", "salaries/compensation.md"}, {"hr", "reviews/performance-cycle.md"}}},
      // finance
      {"finance", {"heidi", "ivan"}, "Which Henderson invoices are overdue?", {"finance"},
       {{"finance", "invoices/henderson-invoices.md"}}},
      {"finance", {"heidi", "ivan"}, "What is the total billed to Henderson this quarter?", {"finance"},
       {{"finance", "invoices/henderson-invoices.md"}}},
      {"finance", {"heidi", "ivan"}, "What is the FY2026 budget for travel expenses?", {"finance"},
       {{"finance", "budget/fy2026-budget.md"}}},
      {"finance", {"heidi", "ivan"}, "How much of the expense budget has been spent so far?", {"finance"},
       {{"finance", "budget/fy2026-budget.md"}}},
      {"finance", {"heidi", "ivan"}, "When is the next payment from Henderson due?", {"finance"},
       {{"finance", "invoices/henderson-invoices.md"}}},
      {"finance", {"heidi", "ivan"}, "What margin are we targeting this fiscal year?", {"finance"},
       {{"finance", "budget/fy2026-budget.md"}}},
      {"finance", {"heidi", "ivan"}, "List outstanding receivables", {"finance"},
       {{"finance", "invoices/henderson-invoices.md"}}},
      // cross-domain
      {"cross-domain", {"alice", "bob", "judy"}, "Give me the Henderson account profile and the deal stage",
       {"clients", "sales"}, {{"clients", "henderson/profile.md"}, {"sales", "clients/henderson/deal-status.md"}}},
      {"cross-domain", {"alice"}, "Is the Atlas project status putting the Henderson renewal at risk?",
       {"delivery", "sales"},
       {{"delivery", "projects/atlas/status.md"}, {"sales", "clients/henderson/deal-status.md"}}},
      {"cross-domain", {"alice"}, "Are Henderson invoices overdue before we send the renewal proposal?",
       {"finance", "sales"},
       {{"finance", "invoices/henderson-invoices.md"}, {"sales", "clients/henderson/deal-status.md"}}},
      {"cross-domain", {"heidi"}, "Check the Henderson invoices against the rate card pricing",
       {"finance", "sales"}, {{"finance", "invoices/henderson-invoices.md"}, {"sales", "pricing/rate-card.md"}}},
      {"cross-domain", {"dan", "erin"}, "Who are the Henderson stakeholders for the Atlas project?",
       {"clients", "delivery"}, {{"clients", "henderson/profile.md"}, {"delivery", "projects/atlas/plan.md"}}},
      {"cross-domain", {"judy"}, "Summarize the Henderson client relationship and Atlas delivery risks",
       {"clients", "delivery"}, {{"clients", "henderson/profile.md"}, {"delivery", "projects/atlas/status.md"}}},
      {"cross-domain", {"alice", "carol"}, "Who are the Crestline contacts and what pricing did we quote them?",
       {"clients", "sales"}, {{"clients", "crestline/contacts.md"}, {"sales", "pricing/rate-card.md"}}},
      {"cross-domain", {"heidi"}, "What is the Henderson account history and outstanding payments?",
       {"clients", "finance"},
       {{"clients", "henderson/profile.md"}, {"finance", "invoices/henderson-invoices.md"}}},
      {"cross-domain", {"alice", "judy"}, "Brightwater account notes and any open proposals", {"clients", "sales"},
       {{"clients", "brightwater/account-notes.md"}}},
      {"cross-domain", {"dan"}, "Does the Atlas plan fit the scope of the Henderson deal?", {"delivery", "sales"},
       {{"delivery", "projects/atlas/plan.md"}, {"sales", "clients/henderson/deal-status.md"}}},
  };
  return v;
}

const std::vector<const char*>& prefixes() {
  static const std::vector<const char*> v = {"", "", "", "Quick question: ", "Can you check ", "I need to know: ",
                                             "For the team meeting, "};
  return v;
}

void write_file(const fs::path& p, std::string_view content) {
  fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error(errc::kWriteFailed, "cannot write " + p.string());
  out << content;
}

Benchmark build_benchmark(std::uint64_t seed) {
  const std::map<std::string, int> mix = {
      {"sales", 50}, {"delivery", 40}, {"hr", 30}, {"finance", 30}, {"cross-domain", 50}};
  const std::vector<std::string> order = {"sales", "delivery", "hr", "finance", "cross-domain"};
  std::mt19937_64 rng(seed);
  Benchmark b;
  b.seed = seed;
  int n = 0;
  for (const auto& cat : order) {
    std::vector<const Template*> pool;
    for (const auto& t : templates()) {
      if (cat == t.category) pool.push_back(&t);
    }
    for (int i = 0; i < mix.at(cat); ++i) {
      // Every template is used before any repeats.
      const Template& t = *pool[static_cast<std::size_t>(i) % pool.size()];
      const auto& user = t.users[rng() % t.users.size()];
      const std::string prefix = prefixes()[rng() % prefixes().size()];
      std::string text = t.text;
      if (!prefix.empty()) text = prefix + static_cast<char>(std::tolower(static_cast<unsigned char>(text[0]))) +
                                  text.substr(1);
      BenchQuery q;
      char id[16];
      std::snprintf(id, sizeof id, "q%03d", ++n);
      q.id = id;
      q.category = cat;
      q.user = user;
      q.text = std::move(text);
      for (const auto* l : t.labels) q.domains.emplace_back(l);
      for (const auto& [d, p] : t.truth) q.ground_truth.push_back(seed_unit(d, p));
      b.queries.push_back(std::move(q));
    }
  }
  return b;
}

}  // namespace

std::string seed_unit(std::string_view domain, std::string_view path) {
  return unit_id(source_id(domain, source_of(domain)), path);
}

Instant seed_epoch() { return *parse_rfc3339("2026-03-16T09:00:00Z"); }

Benchmark Benchmark::from_json(const nlohmann::json& j) {
  Benchmark b;
  try {
    b.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& q : j.at("queries")) {
      b.queries.push_back(BenchQuery{q.at("id").get<std::string>(), q.at("category").get<std::string>(),
                                     q.at("user").get<std::string>(), q.at("text").get<std::string>(),
                                     q.at("domains").get<std::vector<std::string>>(),
                                     q.at("ground_truth").get<std::vector<std::string>>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(errc::kSchemaError, e.what(), "benchmark");
  }
  return b;
}

Benchmark Benchmark::load(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw Error(errc::kNotFound, "cannot read " + file.string());
  auto j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded()) throw Error(errc::kSyntaxError, "invalid JSON", file.string());
  return from_json(j);
}

nlohmann::ordered_json Benchmark::to_json() const {
  nlohmann::ordered_json j;
  j["seed"] = seed;
  std::map<std::string, int> mix;
  for (const auto& q : queries) ++mix[q.category];
  j["mix"] = mix;
  j["queries"] = nlohmann::ordered_json::array();
  for (const auto& q : queries) {
    j["queries"].push_back({{"id", q.id},
                            {"category", q.category},
                            {"user", q.user},
                            {"text", q.text},
                            {"domains", q.domains},
                            {"ground_truth", q.ground_truth}});
  }
  return j;
}

void generate_seed(const fs::path& dir, std::uint64_t seed) {
  std::error_code ec;
  if (fs::exists(dir, ec) && !fs::is_empty(dir, ec)) {
    throw Error(errc::kDirectoryNotEmpty, dir.string() + " is not empty");
  }
  fs::create_directories(dir);

  for (const auto& m : build_manifests()) write_file(dir / "manifests" / (m.name + ".yaml"), serialize_manifest(m));

  std::map<std::string, nlohmann::ordered_json> sidecars;
  for (const auto& f : seed_files()) {
    write_file(dir / "sources" / f.domain / f.path, f.content);
    sidecars[f.domain][f.path] = {{"author", f.author},
                                  {"timestamp", f.timestamp},
                                  {"sensitivity", f.sensitivity},
                                  {"authority", f.authority},
                                  {"entities", f.entities}};
  }
  for (const auto& [domain, side] : sidecars) write_file(dir / "sources" / domain / ".ctxmeta.json", side.dump(2) + "\n");

  nlohmann::ordered_json tax;
  for (const auto& [d, kws] : taxonomy_keywords()) tax[d] = kws;
  write_file(dir / "taxonomy.json", tax.dump(2) + "\n");
  write_file(dir / "org.json", build_org().to_json().dump(2) + "\n");
  write_file(dir / "entities.json",
             nlohmann::ordered_json(std::vector<std::string>{"Atlas", "Brightwater", "Crestline", "Henderson"})
                     .dump(2) +
                 "\n");
  write_file(dir / "benchmark.json", build_benchmark(seed).to_json().dump(2) + "\n");

  write_file(dir / "fixtures" / "v2" / "rate-card.md", kRateCardV2);
  write_file(dir / "fixtures" / "v2" / "atlas-status-at-risk.md", kAtlasAtRisk);
}

const DomainManifest* Corpus::manifest(std::string_view name) const {
  for (const auto& m : manifests) {
    if (m.name == name) return &m;
  }
  return nullptr;
}

fs::path Corpus::fixture(std::string_view name) const { return root / "fixtures" / "v2" / std::string(name); }

fs::path Corpus::source_file(std::string_view domain, std::string_view path) const {
  return root / "sources" / std::string(domain) / std::string(path);
}

Corpus load_corpus(const fs::path& dir) {
  Corpus c;
  c.root = fs::absolute(dir);
  c.manifests = load_manifest_dir(c.root / "manifests");
  resolve_source_roots(c.manifests, c.root);
  c.taxonomy = Taxonomy::load(c.root / "taxonomy.json");
  c.org = OrgSpec::load(c.root / "org.json");
  if (std::ifstream in(c.root / "entities.json"); in) {
    auto j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_array()) c.known_entities = j.get<std::set<std::string>>();
  }
  c.benchmark = Benchmark::load(c.root / "benchmark.json");
  return c;
}

ControlPlaneConfig plane_config(const Corpus& corpus, EngineMode mode) {
  ControlPlaneConfig cfg;
  cfg.manifests = corpus.manifests;
  cfg.taxonomy = corpus.taxonomy;
  cfg.org = corpus.org;
  cfg.mode = mode;
  cfg.known_entities = corpus.known_entities;
  return cfg;
}

}  // namespace ctxk::bench
