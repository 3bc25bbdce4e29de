use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::{self, Write};

use super::{GeneratedSource, Target};
use crate::engine::{EngineConfig, Model, ModelError, SchedulingPolicy};
use crate::ir::{Expr, GrafcetNet};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CodegenError {
    Model(ModelError),
}

impl fmt::Display for CodegenError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CodegenError::Model(e) => e.fmt(f),
        }
    }
}

impl core::error::Error for CodegenError {}

fn c_expr(e: &Expr, model: &Model) -> String {
    match e {
        Expr::Var(v) => format!("in[{}]", model.input_index(v).expect("declared input")),
        Expr::Const(c) => String::from(if *c { "1" } else { "0" }),
        Expr::Not(x) => format!("!{}", c_expr(x, model)),
        Expr::And(es) | Expr::Or(es) => {
            let op = if matches!(e, Expr::And(_)) { " && " } else { " || " };
            let parts: Vec<String> = es.iter().map(|x| c_expr(x, model)).collect();
            format!("({})", parts.join(op))
        }
    }
}

fn list(items: impl IntoIterator<Item = String>) -> String {
    let v: Vec<String> = items.into_iter().collect();
    if v.is_empty() {
        String::from("0")
    } else {
        v.join(", ")
    }
}

fn quoted<'a>(names: impl IntoIterator<Item = &'a String>) -> String {
    list(names.into_iter().map(|n| format!("\"{n}\"")))
}

/// A single C translation unit running the net with the same loop, order and
/// trace lines as the engine. Events are read from standard input.
pub fn gen_c(net: &GrafcetNet, config: &EngineConfig) -> Result<GeneratedSource, CodegenError> {
    let model = Model::flat(net).map_err(CodegenError::Model)?;
    let mut o = String::new();
    let n_arcs = model.transitions.iter().map(|t| t.pre.len().max(t.post.len())).max().unwrap_or(0);
    let policy = match config.policy {
        SchedulingPolicy::DeclarationOrder => 0,
        SchedulingPolicy::LowestLevel => 1,
        SchedulingPolicy::Priority => 2,
    };

    let _ = writeln!(o, "/* Controller for grafcet {}. */", net.name);
    o.push_str("#include <stdio.h>\n#include <stdlib.h>\n#include <string.h>\n\n");
    let _ = writeln!(o, "#define N_STEPS {}", model.steps.len());
    let _ = writeln!(o, "#define N_TRANS {}", model.transitions.len());
    let _ = writeln!(o, "#define N_INPUTS {}", model.inputs.len());
    let _ = writeln!(o, "#define N_OUTPUTS {}", model.outputs.len());
    let _ = writeln!(o, "#define N_GROUPS {}", model.grafcets.len());
    let _ = writeln!(o, "#define N_INITIAL {}", model.initial.len());
    let _ = writeln!(o, "#define MAX_ARCS {}", n_arcs);
    let _ = writeln!(o, "#define POLICY {policy}");
    let _ = writeln!(o, "#define BUDGET {}", config.budget.unwrap_or(0));
    let _ = writeln!(o, "#define DIVERGENCE_CAP {}UL", config.divergence_cap);
    o.push('\n');

    let names: Vec<&String> = model.steps.iter().map(|s| &s.name).collect();
    let _ = writeln!(o, "static const char *const step_name[N_STEPS + 1] = {{{}}};", quoted(names));
    let _ = writeln!(
        o,
        "static const unsigned step_priority[N_STEPS + 1] = {{{}}};",
        list(model.steps.iter().map(|s| format!("{}u", s.priority)))
    );
    let _ = writeln!(
        o,
        "static const int step_tasks[N_STEPS + 1] = {{{}}};",
        list(model.steps.iter().map(|s| s.tasks.len().to_string()))
    );
    let _ = writeln!(o, "static const char *const input_name[N_INPUTS + 1] = {{{}}};", quoted(&model.inputs));
    let _ = writeln!(o, "static const char *const output_name[N_OUTPUTS + 1] = {{{}}};", quoted(&model.outputs));
    let _ = writeln!(
        o,
        "static const char *const trans_name[N_TRANS + 1] = {{{}}};",
        quoted(model.transitions.iter().map(|t| &t.name))
    );
    let arcs = |v: &[usize]| {
        let mut s: Vec<usize> = v.to_vec();
        s.sort_unstable();
        s.dedup();
        let mut items: Vec<String> = s.iter().map(|x| x.to_string()).collect();
        items.push(String::from("-1"));
        format!("{{{}}}", items.join(", "))
    };
    let _ = writeln!(
        o,
        "static const int trans_pre[N_TRANS + 1][MAX_ARCS + 1] = {{{}}};",
        list(model.transitions.iter().map(|t| arcs(&t.pre)))
    );
    let _ = writeln!(
        o,
        "static const int trans_post[N_TRANS + 1][MAX_ARCS + 1] = {{{}}};",
        list(model.transitions.iter().map(|t| arcs(&t.post)))
    );
    let _ = writeln!(
        o,
        "static const int trans_group[N_TRANS + 1] = {{{}}};",
        list(model.transitions.iter().map(|t| t.grafcet.to_string()))
    );
    let _ = writeln!(
        o,
        "static const unsigned group_level[N_GROUPS] = {{{}}};",
        list(model.grafcets.iter().map(|g| format!("{}u", g.level)))
    );
    let _ = writeln!(
        o,
        "static const unsigned group_priority[N_GROUPS] = {{{}}};",
        list(model.grafcets.iter().map(|g| format!("{}u", g.priority)))
    );
    let _ = writeln!(
        o,
        "static const int initial_steps[N_INITIAL + 1] = {{{}}};",
        list({
            let mut v = model.initial.clone();
            v.sort_unstable();
            v.dedup();
            v.into_iter().map(|x| x.to_string())
        })
    );
    o.push_str(STATE);

    o.push_str("\nstatic int receptivity(int t)\n{\n    switch (t) {\n");
    for (i, t) in model.transitions.iter().enumerate() {
        let _ = writeln!(o, "    case {i}: /* {} */\n        return {};", t.name, c_expr(&t.receptivity, &model));
    }
    o.push_str("    default:\n        return 0;\n    }\n}\n");

    let mut symbols = Vec::new();
    for (i, s) in model.steps.iter().enumerate() {
        let _ = writeln!(o, "\n/* Step {}. */", s.name);
        let _ = writeln!(o, "static void step_action_{i}(int task)\n{{");
        let _ = writeln!(o, "    printf(\"T=%llu TASK {}#%d\\n\", tick, task);", s.name);
        if s.tasks.is_empty() {
            o.push_str("    (void)task;\n");
        } else {
            o.push_str("    switch (task) {\n");
            for (k, task) in s.tasks.iter().enumerate() {
                let outs: Vec<&str> = task.iter().map(|&x| model.outputs[x].as_str()).collect();
                let _ = writeln!(o, "    case {k}: /* {} */", outs.join(", "));
                o.push_str("        /* USER CODE BEGIN */\n        /* USER CODE END */\n        break;\n");
            }
            o.push_str("    default:\n        break;\n    }\n");
        }
        o.push_str("}\n");
        let _ = writeln!(o, "\nstatic void step_outputs_{i}(int done, int *asserted)\n{{");
        if s.tasks.iter().all(|t| t.is_empty()) {
            o.push_str("    (void)done;\n    (void)asserted;\n");
        }
        for (k, task) in s.tasks.iter().enumerate() {
            for &x in task {
                let _ = writeln!(o, "    if (done > {k})\n        asserted[{x}] = 1;");
            }
        }
        o.push_str("}\n");
        symbols.push(format!("step_action_{i}"));
    }
    let _ = writeln!(
        o,
        "\nstatic void (*const step_action[N_STEPS + 1])(int) = {{{}}};",
        list((0..model.steps.len()).map(|i| format!("step_action_{i}")))
    );
    let _ = writeln!(
        o,
        "static void (*const step_outputs[N_STEPS + 1])(int, int *) = {{{}}};",
        list((0..model.steps.len()).map(|i| format!("step_outputs_{i}")))
    );
    o.push_str(LOOP);
    symbols.push(String::from("main"));
    Ok(GeneratedSource { target: Target::C, text: o, symbols })
}

const STATE: &str = r#"
static int active[N_STEPS + 1];
static unsigned long long elapsed[N_STEPS + 1];
static int cursor[N_STEPS + 1];
static int in[N_INPUTS + 1];
static int out[N_OUTPUTS + 1];
static int warned[N_OUTPUTS + 1];
static unsigned long long tick;
"#;

const LOOP: &str = r#"
static int fireable(int t)
{
    int k;
    for (k = 0; trans_pre[t][k] >= 0; k++)
        if (!active[trans_pre[t][k]])
            return 0;
    return receptivity(t);
}

static unsigned long long group_key(int g)
{
    switch (POLICY) {
    case 1:
        return group_level[g];
    case 2:
        return 0xFFFFFFFFull - group_priority[g];
    default:
        return 0;
    }
}

static unsigned max_post_priority(int t)
{
    unsigned best = 0;
    int k;
    for (k = 0; trans_post[t][k] >= 0; k++)
        if (step_priority[trans_post[t][k]] > best)
            best = step_priority[trans_post[t][k]];
    return best;
}

static unsigned long long max_pre_elapsed(int t)
{
    unsigned long long best = 0;
    int k;
    for (k = 0; trans_pre[t][k] >= 0; k++)
        if (elapsed[trans_pre[t][k]] > best)
            best = elapsed[trans_pre[t][k]];
    return best;
}

/* Nonzero when transition a is scheduled before b. */
static int before(int a, int b)
{
    unsigned long long ga = group_key(trans_group[a]), gb = group_key(trans_group[b]);
    unsigned pa, pb;
    unsigned long long ta, tb;
    if (ga != gb)
        return ga < gb;
    if (trans_group[a] != trans_group[b])
        return trans_group[a] < trans_group[b];
    pa = max_post_priority(a);
    pb = max_post_priority(b);
    if (pa != pb)
        return pa > pb;
    ta = max_pre_elapsed(a);
    tb = max_pre_elapsed(b);
    if (ta != tb)
        return ta > tb;
    return a < b;
}

static int determine(int *x)
{
    int n = 0, t, i;
    for (t = 0; t < N_TRANS; t++) {
        if (!fireable(t))
            continue;
        for (i = n; i > 0 && before(t, x[i - 1]); i--)
            x[i] = x[i - 1];
        x[i] = t;
        n++;
    }
    return n;
}

static int tasks_pending(void)
{
    int s;
    for (s = 0; s < N_STEPS; s++)
        if (active[s] && cursor[s] < step_tasks[s])
            return 1;
    return 0;
}

static void settle(void)
{
    int s, o, k;
    int count[N_OUTPUTS + 1];
    int sources[N_OUTPUTS + 1][N_STEPS + 1];
    for (s = 0; s < N_STEPS; s++) {
        int end = step_tasks[s];
        if (!active[s] || cursor[s] >= end)
            continue;
        if (BUDGET > 0 && cursor[s] + BUDGET < end)
            end = cursor[s] + BUDGET;
        for (k = cursor[s]; k < end; k++)
            step_action[s](k);
        cursor[s] = end;
    }
    memset(count, 0, sizeof count);
    for (s = 0; s < N_STEPS; s++) {
        int asserted[N_OUTPUTS + 1];
        if (!active[s])
            continue;
        memset(asserted, 0, sizeof asserted);
        step_outputs[s](cursor[s], asserted);
        for (o = 0; o < N_OUTPUTS; o++)
            if (asserted[o])
                sources[o][count[o]++] = s;
    }
    for (o = 0; o < N_OUTPUTS; o++) {
        int value = count[o] > 0;
        if (value != out[o]) {
            out[o] = value;
            printf("T=%llu OUT %s=%d\n", tick, output_name[o], value);
        }
    }
    for (o = 0; o < N_OUTPUTS; o++) {
        if (count[o] > 1 && !warned[o]) {
            warned[o] = 1;
            printf("T=%llu WARN output %s asserted by ", tick, output_name[o]);
            for (k = 0; k < count[o]; k++)
                printf(k ? ", %s" : "%s", step_name[sources[o][k]]);
            printf("\n");
        }
    }
}

static void activate(int s)
{
    if (active[s]) {
        printf("T=%llu WARN %s already active\n", tick, step_name[s]);
        return;
    }
    active[s] = 1;
    elapsed[s] = 0;
    cursor[s] = 0;
    printf("T=%llu ACT %s\n", tick, step_name[s]);
}

static void fire(int t)
{
    int k;
    printf("T=%llu FIRE %s\n", tick, trans_name[t]);
    for (k = 0; trans_pre[t][k] >= 0; k++) {
        int s = trans_pre[t][k];
        if (!active[s])
            continue;
        active[s] = 0;
        cursor[s] = 0;
        printf("T=%llu DEACT %s\n", tick, step_name[s]);
    }
    for (k = 0; trans_post[t][k] >= 0; k++)
        activate(trans_post[t][k]);
    settle();
}

static void print_marking(FILE *f)
{
    int s, first = 1;
    fputc('{', f);
    for (s = 0; s < N_STEPS; s++) {
        if (!active[s])
            continue;
        fprintf(f, first ? "%s" : ", %s", step_name[s]);
        first = 0;
    }
    fputc('}', f);
}

/* Next scripted event, or 0 at end of input. Exits on malformed lines. */
static int read_event(unsigned long long *when, char *name, size_t size, int *value)
{
    static char line[1024];
    static unsigned long lineno;
    while (fgets(line, sizeof line, stdin)) {
        char *hash = strchr(line, '#');
        char *p, *eq, *end;
        lineno++;
        if (hash)
            *hash = '\0';
        p = line + strspn(line, " \t\r\n");
        if (!*p)
            continue;
        *when = strtoull(p, &end, 10);
        if (end == p) {
            fprintf(stderr, "line %lu: invalid tick\n", lineno);
            exit(2);
        }
        p = end + strspn(end, " \t");
        eq = strchr(p, '=');
        if (!eq || (size_t)(eq - p) >= size || (eq[1] != '0' && eq[1] != '1')
            || eq[2 + strspn(eq + 2, " \t\r\n")] != '\0') {
            fprintf(stderr, "line %lu: expected <tick> <name>=<0|1>\n", lineno);
            exit(2);
        }
        memcpy(name, p, (size_t)(eq - p));
        name[eq - p] = '\0';
        *value = eq[1] - '0';
        return 1;
    }
    return 0;
}

struct event {
    char name[1024];
    int value;
};

static int have_next;
static unsigned long long next_tick;
static struct event next_event;

/* W: applies the next batch of events sharing a tick. */
static int await_event(void)
{
    struct event *batch = NULL;
    size_t n = 0, cap = 0, k;
    unsigned long long when;
    int s, i;
    if (!have_next && !read_event(&next_tick, next_event.name, sizeof next_event.name, &next_event.value))
        return 0;
    when = next_tick;
    do {
        if (n == cap) {
            cap = cap ? 2 * cap : 8;
            batch = realloc(batch, cap * sizeof *batch);
            if (!batch) {
                fprintf(stderr, "error: out of memory\n");
                exit(1);
            }
        }
        batch[n++] = next_event;
    } while ((have_next = read_event(&next_tick, next_event.name, sizeof next_event.name, &next_event.value))
             && next_tick == when);
    if (when < tick) {
        fprintf(stderr, "error: event source: event at tick %llu is in the past (now %llu)\n", when, tick);
        exit(1);
    }
    for (k = 0; k < n; k++) {
        for (i = 0; i < N_INPUTS && strcmp(batch[k].name, input_name[i]) != 0; i++)
            ;
        if (i == N_INPUTS) {
            fprintf(stderr, "error: tick %llu: unknown input %s\n", when, batch[k].name);
            exit(1);
        }
    }
    for (s = 0; s < N_STEPS; s++)
        if (active[s])
            elapsed[s] += when - tick;
    if (when != tick)
        memset(warned, 0, sizeof warned);
    tick = when;
    for (k = 0; k < n; k++) {
        for (i = 0; strcmp(batch[k].name, input_name[i]) != 0; i++)
            ;
        in[i] = batch[k].value;
        printf("T=%llu IN %s=%d\n", tick, input_name[i], batch[k].value);
    }
    free(batch);
    return 1;
}

int main(void)
{
    int x[N_TRANS + 1];
    unsigned long rounds = 0;
    int k, n;
    printf("T=%llu INIT\n", tick);
    for (k = 0; k < N_INITIAL; k++)
        activate(initial_steps[k]);
    settle();
    for (;;) {
        n = determine(x);
        if (n > 0) {
            if (rounds == DIVERGENCE_CAP) {
                fflush(stdout);
                fprintf(stderr, "error: no stable state after %lu firing rounds without input; marking ", rounds);
                print_marking(stderr);
                fprintf(stderr, " keeps repeating\n");
                return 1;
            }
            rounds++;
            for (k = 0; k < n; k++)
                if (fireable(x[k]))
                    fire(x[k]);
        } else if (tasks_pending()) {
            settle();
        } else {
            fflush(stdout);
            if (!await_event())
                break;
            rounds = 0;
        }
    }
    fflush(stdout);
    return 0;
}
"#;
