// Bank and spec sources shared by the test suites.
#ifndef QUIZFORGE_TESTS_FIXTURES_HPP
#define QUIZFORGE_TESTS_FIXTURES_HPP

#include <string>
#include <vector>

namespace fixtures {

// The fly-in-a-cylinder question, LaTeX syntax, with explicit domains.
inline const char* kMoscaBank = R"qbk(\begin{Problem}{Mosca}
 \Parameter{R}{raggio del cilindro}
 \Cond='R > 0'
 \Parameter{H}{altezza del cilindro}
 \Cond='H > 0'
 \Domain{R}{int,1,10}
 \Domain{H}{int,1,10}

 \begin{Question}
  \begin{Ask}
   Una mosca è chiusa in un bidone cilindrico,
   di raggio di base $R=\Val{R}~\centi\metre$
   e altezza  $H=\Val{H}~\centi\metre$.

   Quanto vale la massima distanza $d$
   che può percorrere in linea retta?
  \end{Ask}

  \Def{d}='\sqrt{4 R^2 + H^2}'

  \begin{Solution}
   La distanza percorsa dalla mosca è
   l'ipotenusa di un triangolo rettangolo
   di base $2R$ e altezza $H$, quindi
   \[
      d = \Expr{d}\simeq\FVal{d}~\centi\metre
   \]
  \end{Solution}

  \begin{Answers}
   \Format='$d\simeq %.2f$'
   \Right='d'     \Wrong='\sqrt{R^2 + H^2}'
   \Wrong='R'     \Wrong='2R'
   \Wrong='0.35d' \Wrong='0.45d'
  \end{Answers}
 \end{Question}
\end{Problem}
)qbk";

// Same question with R=3, H=4 forced through singleton domains.
inline const char* kMoscaForced = R"qbk(\begin{Problem}{Mosca}{geometry}
 \Parameter{R}{raggio del cilindro}
 \Cond='R > 0'
 \Parameter{H}{altezza del cilindro}
 \Cond='H > 0'
 \Domain{R}{set,3}
 \Domain{H}{set,4}
 \begin{Question}
  \begin{Ask}
   Distanza massima per $R=\Val{R}$ e $H=\Val{H}$?
  \end{Ask}
  \Def{d}='\sqrt{4 R^2 + H^2}'
  \begin{Answers}
   \Format='$d\simeq %.2f$'
   \Right='d'     \Wrong='\sqrt{R^2 + H^2}'
   \Wrong='R'     \Wrong='2R'
   \Wrong='0.35d' \Wrong='0.45d'
  \end{Answers}
 \end{Question}
\end{Problem}
)qbk";

// R=1, H=0.1 at %.0f: d prints "2" and so does 2R; every other wrong
// formula prints "1".
inline const char* kCollisionForced = R"qbk(\begin{Problem}{MoscaCollide}{geometry}
 \Parameter{R}{raggio}
 \Cond='R > 0'
 \Parameter{H}{altezza}
 \Cond='H > 0'
 \Domain{R}{set,1}
 \Domain{H}{set,0.1}
 \begin{Question}
  \begin{Ask}
   Distanza massima per $R=\Val{R}$ e $H=\Val{H}$?
  \end{Ask}
  \Def{d}='\sqrt{4 R^2 + H^2}'
  \begin{Answers}
   \Format='%.0f'
   \Right='d'
   \Wrong='\sqrt{R^2 + H^2}' \Wrong='R' \Wrong='2R' \Wrong='0.35d' \Wrong='0.45d'
  \end{Answers}
 \end{Question}
\end{Problem}
)qbk";

// One fixed literal question, no parameters: the smallest legal bank.
inline const char* kTextualBank = R"qbk(\begin{Problem}{Capital}{trivia}
 \begin{Question}
  \begin{Ask}
   Which city is the capital of Italy?
  \end{Ask}
  \begin{Answers}
   \Right='Rome'
   \Wrong='Milan' \Wrong='Naples' \Wrong='Turin'
  \end{Answers}
 \end{Question}
\end{Problem}
)qbk";

// 2 right / 5 wrong textual question for the variant-counting fixtures.
inline const char* kTextualTwoRight = R"qbk(\begin{Problem}{Synonyms}{trivia}
 \begin{Question}
  \begin{Ask}
   Pick a synonym of "large".
  \end{Ask}
  \begin{Answers}
   \Right='big' \Right='huge'
   \Wrong='tiny' \Wrong='narrow' \Wrong='flat' \Wrong='short' \Wrong='thin'
  \end{Answers}
 \end{Question}
\end{Problem}
)qbk";

// Parametric bank builder: `groups` topic groups with `per_group` problems
// each, every problem a one-question diagonal variant with 7 wrong formulas.
inline std::string synthetic_bank(const std::vector<std::string>& groups, int per_group) {
    std::string src;
    for (const std::string& g : groups) {
        for (int p = 0; p < per_group; ++p) {
            const std::string name = g + "-" + std::to_string(p + 1);
            const std::string k = std::to_string(3 + p);
            src += "\\begin{Problem}{" + name + "}{" + g + "}\n";
            src += " \\Parameter{R}{radius}\n \\Cond='R > 0'\n \\Domain{R}{int,1,20}\n";
            src += " \\Parameter{H}{height}\n \\Cond='H > 0'\n \\Domain{H}{int,1,20}\n";
            src += " \\begin{Question}\n";
            src += "  \\begin{Ask}\n   Compute $d$ for $R=\\Val{R}$ and $H=\\Val{H}$ (" + name +
                   ").\n  \\end{Ask}\n";
            src += "  \\Def{d}='\\sqrt{" + k + " R^2 + H^2}'\n";
            src += "  \\begin{Answers}\n";
            src += "   \\Format='$d\\simeq %.3f$'\n";
            src += "   \\Right='d'\n";
            src += "   \\Wrong='\\sqrt{R^2 + H^2}'\n   \\Wrong='R'\n   \\Wrong='2R'\n";
            src += "   \\Wrong='0.35d'\n   \\Wrong='0.45d'\n   \\Wrong='d + 1'\n";
            src += "   \\Wrong='d + 2'\n";
            src += "  \\end{Answers}\n";
            src += " \\end{Question}\n";
            src += "\\end{Problem}\n";
        }
    }
    return src;
}

inline const std::vector<std::string>& entrance_groups() {
    static const std::vector<std::string> g = {"geometry",    "text",         "algebraic",
                                               "exp-log",     "analytic",     "probability",
                                               "trigonometry", "existence"};
    return g;
}

// 8 groups, 20 questions, 4 answers each: the entrance-test shape.
inline const char* kEntranceSpec = R"tsp(test entrance-2004
seed 42
copies 2
group geometry questions 3 answers 4 scramble_answers true scramble_questions true
group text questions 3 answers 4 scramble_answers true scramble_questions true
group algebraic questions 3 answers 4 scramble_answers true scramble_questions true
group exp-log questions 2 answers 4 scramble_answers true scramble_questions true
group analytic questions 2 answers 4 scramble_answers true scramble_questions true
group probability questions 2 answers 4 scramble_answers true scramble_questions true
group trigonometry questions 2 answers 4 scramble_answers true scramble_questions true
group existence questions 3 answers 4 scramble_answers true scramble_questions true
)tsp";

} // namespace fixtures

#endif
