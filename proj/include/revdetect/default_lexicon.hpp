#pragma once

#include <string_view>

namespace revdetect {

// Embedded copy of data/lexicon.txt; tests keep the two in sync.
inline constexpr std::string_view kDefaultLexiconText = R"LEX(# Default lexicon for the rule-based marker extractor.
# One lowercase phrase per line. Matching is case-insensitive.

[section_headers]
# Distinct keywords found at a line start or followed by a colon.
summary
strengths
weaknesses
questions
limitations
contributions
recommendation
overall assessment
minor comments
major comments
soundness
presentation
clarity
originality
significance
suggestions

[critique_phrases]
ablation study
stronger baseline
additional dataset
more experiments
statistical significance
hyperparameter sensitivity
computational cost
comparison with recent
broader evaluation
theoretical analysis
generalizability

[diplomatic_phrases]
well-written overall
could be strengthened
would benefit from
while the paper
that being said
on the positive side
to their credit
it is worth noting
commendable
a valuable contribution
overall, the paper

[generic_phrases]
state-of-the-art
comprehensive framework
novel approach
significant contribution
promising results
extensive experiments
valuable insights
wide range of
robust performance
important problem
well-motivated
thorough evaluation

[personal_markers]
i think
i may be wrong
after re-reading
i found
in my experience
i struggled with
i'm not sure
i am not sure
i might be wrong
i believe
i feel
i was confused
to be honest
my guess is

[reference_patterns]
# Keyword followed by a number (optional plural "s", whitespace or "(").
line
page
figure
fig.
table
equation
eq.
section
§
)LEX";

}  // namespace revdetect
