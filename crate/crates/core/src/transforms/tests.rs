use super::*;
use crate::corpus::TestCase;
use crate::frontend::visit::for_each_stmt;
use crate::frontend::{parse_source, print_source};
use crate::interp::{check_equivalence, execute, Limits};

const RICH: &str = r#"#include <cstdio>
using namespace std;

long long square(long long v) { return v * v; }

int main() {
    int n, k;
    int total = 0;
    int count = 0;
    cin >> n >> k;
    long long acc = 0;
    for (int i = 0; i < n; i++) {
        if (i % 3 == 0) continue;
        total = total + i;
        acc += square(i);
    }
    int j = n;
    while (j > 0) j -= k;
    if (total > k) {
        printf("big %d %lld\n", total, acc);
    } else
        cout << "small " << total << endl;
    string s = "ab";
    char c = 'x';
    count++;
    printf("%s%c%d\n", s.c_str(), c, count);
    double d = 1.5;
    cout << d << ' ' << (j < 0) << endl;
    return 0;
}
"#;

fn tests() -> Vec<TestCase> {
    ["5 2", "10 3", "0 1", "7 7"]
        .iter()
        .map(|i| {
            let p = parse_source(RICH).unwrap();
            TestCase::new(*i, execute(&p, i, Limits::default()).stdout)
        })
        .collect()
}

fn io_count(p: &Program) -> usize {
    let mut n = 0;
    for_each_stmt(p, &mut |s| n += s.kind.is_io() as usize);
    n
}

#[test]
fn every_action_is_sound_and_round_trips() {
    let p = parse_source(RICH).unwrap();
    let tests = tests();
    let actions = enumerate_actions(&p);
    for t in TransformId::ALL {
        assert!(actions.iter().any(|a| a.transform == t), "{t} has no site in the sample");
    }
    for a in &actions {
        let q = apply(&p, a).unwrap_or_else(|e| panic!("{a}: {e}"));
        let text = print_source(&q);
        let reparsed = parse_source(&text).unwrap_or_else(|e| panic!("{a}: {e}\n{text}"));
        assert_eq!(reparsed, q, "{a} does not round trip:\n{text}");
        let v = check_equivalence(&p, &text, &tests).unwrap();
        assert!(v.is_equivalent(), "{a} broke semantics: {v:?}\n{text}");
        assert_eq!(io_count(&q), io_count(&p), "{a}");
    }
    assert_eq!(p, parse_source(RICH).unwrap(), "input was modified");
}

#[test]
fn random_sequences_stay_sound() {
    use rand::{Rng, SeedableRng};
    let p = parse_source(RICH).unwrap();
    let tests = tests();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
    for _ in 0..40 {
        let mut cur = p.clone();
        for _ in 0..6 {
            let acts = enumerate_actions(&cur);
            let a = &acts[rng.random_range(0..acts.len())];
            cur = apply(&cur, a).unwrap();
        }
        let text = print_source(&cur);
        assert!(check_equivalence(&p, &text, &tests).unwrap().is_equivalent(), "{text}");
    }
}

#[test]
fn t1_hoists_declaration_and_moves_step() {
    let p = parse_source("int main(){int n=3,s=0;for(int i=0;i<n;i++){s+=i;}cout<<s;return 0;}").unwrap();
    let acts = enumerate_transform(&p, TransformId::T1);
    assert_eq!(acts.len(), 1);
    let out = print_source(&apply(&p, &acts[0]).unwrap());
    assert!(out.contains("    int i = 0;\n    while (i < n) {\n        s += i;\n        i++;\n    }\n"), "{out}");
}

#[test]
fn t1_rewrites_continue_and_wraps_reused_names() {
    let src =
        "int main(){int s=0;for(int i=0;i<4;i++){if(i==1)continue;s+=i;}for(int i=0;i<2;i++)s++;cout<<s;return 0;}";
    let p = parse_source(src).unwrap();
    let a = enumerate_transform(&p, TransformId::T1)[0].clone();
    let out = print_source(&apply(&p, &a).unwrap());
    assert!(out.contains("if (i == 1) {\n                i++;\n                continue;\n            }"), "{out}");
    // `i` is declared twice in main, so the loop keeps its own scope.
    assert!(out.contains("    {\n        int i = 0;\n        while (i < 4) {"), "{out}");
    let tests = [TestCase::new("", "7")];
    assert!(check_equivalence(&p, &out, &tests).unwrap().is_equivalent());
}

#[test]
fn t1_without_loop_is_inapplicable() {
    let p = parse_source("int main(){int x=0; while(x<3) x++; return 0;}").unwrap();
    assert!(enumerate_transform(&p, TransformId::T1).is_empty());
    let bogus = TransformAction { transform: TransformId::T1, site: Site { path: vec![0, 1], payload: Payload::None } };
    assert!(matches!(apply(&p, &bogus), Err(TransformError::InapplicableAction(_))));
}

#[test]
fn t5_rename_replaces_every_occurrence() {
    let p = parse_source("int main(){int a=1; int b=a+a; cout<<a<<b; return 0;}").unwrap();
    let acts = enumerate_transform(&p, TransformId::T5);
    let a = acts.iter().find(|x| x.site.payload == Payload::Name("valueNum".into())).unwrap();
    let q = apply(&p, a).unwrap();
    let mut names = Vec::new();
    crate::frontend::visit::for_each_ident(&q, &mut |id| names.push(id.name.clone()));
    assert!(!names.contains(&"a".to_string()));
    assert_eq!(names.iter().filter(|n| *n == "valueNum").count(), 4);
}

#[test]
fn t5_pool_is_bounded() {
    let decls: String = (0..12).map(|i| format!("int v{i}=0;")).collect();
    let p = parse_source(&format!("int main(){{{decls} return 0;}}")).unwrap();
    let acts = enumerate_transform(&p, TransformId::T5);
    assert_eq!(acts.len(), 3 * 8);
}

#[test]
fn enumeration_is_deterministic_and_sparse_for_empty_main() {
    let p = parse_source(RICH).unwrap();
    assert_eq!(enumerate_actions(&p), enumerate_actions(&p));
    let empty = parse_source("int main(){}").unwrap();
    assert!(enumerate_actions(&empty)
        .iter()
        .all(|a| matches!(a.transform.family(), Family::Layout | Family::Declarations)));
    let one_for = parse_source("int main(){int s=0; for(int i=0;i<3;i++){s+=i;} return 0;}").unwrap();
    assert_eq!(enumerate_actions(&one_for).iter().filter(|a| a.transform == TransformId::T1).count(), 1);
}

#[test]
fn inverse_pairs_are_semantic_no_ops() {
    let src = "int main(){int a=1,b=2; int s=0; for(int i=0;i<3;i++){s+=a*i+b;} cout<<s<<endl; return 0;}";
    let p = parse_source(src).unwrap();
    let t = [TestCase::new("", "9")];
    let t1 = apply(&p, &enumerate_transform(&p, TransformId::T1)[0]).unwrap();
    let back = apply(&t1, &enumerate_transform(&t1, TransformId::T2)[0]).unwrap();
    assert!(check_equivalence(&p, &print_source(&back), &t).unwrap().is_equivalent());
    let split = apply(&p, &enumerate_transform(&p, TransformId::T6)[0]).unwrap();
    let merged = apply(&split, &enumerate_transform(&split, TransformId::T7)[0]).unwrap();
    assert_eq!(print_source(&merged), print_source(&p));
}

#[test]
fn t3_t4_convert_between_io_styles() {
    let p = parse_source(r#"int main(){int a=5; char c='q'; printf("a=%d %c%%\n", a, c); return 0;}"#).unwrap();
    let q = apply(&p, &enumerate_transform(&p, TransformId::T3)[0]).unwrap();
    let text = print_source(&q);
    assert!(text.contains(r#"cout << "a=" << a << " " << c << "%" << endl;"#), "{text}");
    let back = apply(&q, &enumerate_transform(&q, TransformId::T4)[0]).unwrap();
    assert!(print_source(&back).contains(r#"printf("a=%d %c%%\n", a, c);"#), "{}", print_source(&back));
    let f = parse_source(r#"int main(){double d=1; printf("%f\n", d); cout<<d; return 0;}"#).unwrap();
    assert!(enumerate_transform(&f, TransformId::T3).is_empty());
    assert!(enumerate_transform(&f, TransformId::T4).is_empty());
}

#[test]
fn t8_cycles_through_forms() {
    let p = parse_source("int main(){int x=0; x=x+1; return x;}").unwrap();
    let forms: Vec<_> = enumerate_transform(&p, TransformId::T8).into_iter().map(|a| a.site.payload).collect();
    assert_eq!(
        forms,
        vec![
            Payload::Form(UpdateForm::Compound),
            Payload::Form(UpdateForm::Postfix),
            Payload::Form(UpdateForm::Prefix)
        ]
    );
    let k = parse_source("int main(){int x=0,y=2; x*=y+1; return x;}").unwrap();
    let plain = apply(&k, &enumerate_transform(&k, TransformId::T8)[0]).unwrap();
    assert!(print_source(&plain).contains("x = x * (y + 1);"));
}

#[test]
fn t9_negates_and_guards_dangling_else() {
    let p = parse_source("int main(){int a=1,b=2; if(a<b) a=3; else if(b>0) b=4; cout<<a<<b; return 0;}").unwrap();
    let q = apply(&p, &enumerate_transform(&p, TransformId::T9)[0]).unwrap();
    let text = print_source(&q);
    assert!(text.contains("if (a >= b) {\n        if (b > 0)"), "{text}");
    let d = parse_source("int main(){double a=1,b=2; if(a<b) a=3; else b=4; return 0;}").unwrap();
    let q = apply(&d, &enumerate_transform(&d, TransformId::T9)[0]).unwrap();
    assert!(print_source(&q).contains("if (!(a < b))"));
}

#[test]
fn t11_round_trip() {
    let p = parse_source(
        "using namespace std;\nint main(){long long x=1; vector<long long> v; cout<<(long long)x; return 0;}",
    )
    .unwrap();
    let q = apply(&p, &enumerate_transform(&p, TransformId::T11)[0]).unwrap();
    let text = print_source(&q);
    assert!(text.contains("using namespace std;\ntypedef long long ll;\n"), "{text}");
    assert!(text.contains("vector<ll> v;") && !text.contains("long long x"), "{text}");
    let back = apply(&q, &enumerate_transform(&q, TransformId::T11)[0]).unwrap();
    assert_eq!(print_source(&back), print_source(&p));
}

#[test]
fn t12_moves_to_first_use() {
    let p = parse_source("int main(){int r=0; int n; cin>>n; n++; r=n*2; cout<<r; return 0;}").unwrap();
    let acts = enumerate_transform(&p, TransformId::T12);
    assert_eq!(acts.len(), 1);
    let text = print_source(&apply(&p, &acts[0]).unwrap());
    assert!(text.contains("n++;\n    int r = 0;\n    r = n * 2;"), "{text}");
}

#[test]
fn t10_toggles_braces() {
    let p = parse_source("int main(){int x=0; if(x) x=1; while(x<3){x++;} return 0;}").unwrap();
    let acts = enumerate_transform(&p, TransformId::T10);
    assert_eq!(acts.len(), 2);
    let text = print_source(&apply_all(&p, &[acts[0].clone()]).unwrap());
    assert!(text.contains("if (x) {\n        x = 1;\n    }"), "{text}");
    let q = apply(&p, &acts[1]).unwrap();
    assert!(print_source(&q).contains("while (x < 3)\n        x++;"), "{}", print_source(&q));
}

#[test]
fn catalog_lists_twelve_with_families() {
    assert_eq!(TransformId::ALL.len(), 12);
    assert_eq!(TransformId::parse("t10"), Some(TransformId::T10));
    assert_eq!(serde_json::to_string(&TransformId::T3).unwrap(), "\"T3\"");
}
