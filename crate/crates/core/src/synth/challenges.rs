use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// A programming task: a neutral reference solution plus a test-input generator.
pub struct Challenge {
    pub name: &'static str,
    pub source: &'static str,
    pub gen_input: fn(&mut ChaCha8Rng) -> String,
}

fn ints(rng: &mut ChaCha8Rng, n: usize, lo: i64, hi: i64) -> String {
    (0..n).map(|_| rng.random_range(lo..=hi).to_string()).collect::<Vec<_>>().join(" ")
}

fn word(rng: &mut ChaCha8Rng, len: usize) -> String {
    (0..len).map(|_| rng.random_range(b'a'..=b'z') as char).collect()
}

fn palindrome_or_not(rng: &mut ChaCha8Rng) -> String {
    let len = rng.random_range(1..=4);
    let half = word(rng, len);
    if rng.random_bool(0.5) {
        let rev: String = half.chars().rev().collect();
        format!("{half}{rev}")
    } else {
        let len = rng.random_range(1..=7);
        word(rng, len)
    }
}

pub const CHALLENGES: [Challenge; 8] = [
    Challenge {
        name: "sum",
        source: r#"#include <iostream>
using namespace std;

int main() {
    int n;
    cin >> n;
    long long sum = 0;
    for (int i = 0; i < n; i++) {
        long long x;
        cin >> x;
        sum += x;
    }
    cout << sum << endl;
    return 0;
}
"#,
        gen_input: |rng| {
            let n = rng.random_range(0..=8);
            format!("{n}\n{}\n", ints(rng, n, -1000, 1000))
        },
    },
    Challenge {
        name: "primes",
        source: r#"#include <iostream>
using namespace std;

bool isPrime(int x) {
    if (x < 2) {
        return false;
    }
    for (int d = 2; d * d <= x; d++) {
        if (x % d == 0) {
            return false;
        }
    }
    return true;
}

int main() {
    int n;
    cin >> n;
    int cnt = 0;
    for (int i = 2; i <= n; i++) {
        if (isPrime(i)) {
            cnt++;
        }
    }
    cout << cnt << endl;
    return 0;
}
"#,
        gen_input: |rng| format!("{}\n", rng.random_range(0..=200)),
    },
    Challenge {
        name: "maxrun",
        source: r#"#include <iostream>
using namespace std;

int main() {
    int n;
    cin >> n;
    long long best = -1000000000, cur = 0;
    for (int i = 0; i < n; i++) {
        long long x;
        cin >> x;
        cur = max(cur + x, x);
        best = max(best, cur);
    }
    cout << best << endl;
    return 0;
}
"#,
        gen_input: |rng| {
            let n = rng.random_range(1..=8);
            format!("{n}\n{}\n", ints(rng, n, -50, 50))
        },
    },
    Challenge {
        name: "palindrome",
        source: r#"#include <iostream>
#include <string>
using namespace std;

int main() {
    int t;
    cin >> t;
    for (int q = 0; q < t; q++) {
        string s;
        cin >> s;
        int lo = 0, hi = s.size() - 1;
        bool ok = true;
        while (lo < hi) {
            if (s[lo] != s[hi]) {
                ok = false;
            }
            lo++;
            hi--;
        }
        if (ok) {
            cout << "YES" << endl;
        } else {
            cout << "NO" << endl;
        }
    }
    return 0;
}
"#,
        gen_input: |rng| {
            let t = rng.random_range(1..=4);
            let words: Vec<String> = (0..t).map(|_| palindrome_or_not(rng)).collect();
            format!("{t}\n{}\n", words.join("\n"))
        },
    },
    Challenge {
        name: "fib",
        source: r#"#include <iostream>
using namespace std;

int main() {
    int n;
    cin >> n;
    long long a = 0, b = 1;
    for (int i = 0; i < n; i++) {
        long long c = (a + b) % 1000000007;
        a = b;
        b = c;
    }
    cout << a << endl;
    return 0;
}
"#,
        gen_input: |rng| format!("{}\n", rng.random_range(0..=90)),
    },
    Challenge {
        name: "gcd",
        source: r#"#include <iostream>
using namespace std;

long long gcd(long long a, long long b) {
    while (b != 0) {
        long long r = a % b;
        a = b;
        b = r;
    }
    return a;
}

int main() {
    int q;
    cin >> q;
    for (int i = 0; i < q; i++) {
        long long x, y;
        cin >> x >> y;
        long long g = gcd(x, y);
        cout << g << " " << x / g * y << endl;
    }
    return 0;
}
"#,
        gen_input: |rng| {
            let q = rng.random_range(1..=4);
            let pairs: Vec<String> = (0..q).map(|_| ints(rng, 2, 1, 10000)).collect();
            format!("{q}\n{}\n", pairs.join("\n"))
        },
    },
    Challenge {
        name: "sort",
        source: r#"#include <iostream>
#include <vector>
using namespace std;

int main() {
    int n;
    cin >> n;
    vector<int> v;
    for (int i = 0; i < n; i++) {
        int x;
        cin >> x;
        v.push_back(x);
    }
    for (int i = 0; i < n; i++) {
        for (int j = 0; j + 1 < n - i; j++) {
            if (v[j] > v[j + 1]) {
                swap(v[j], v[j + 1]);
            }
        }
    }
    for (int i = 0; i < n; i++) {
        cout << v[i] << " ";
    }
    cout << endl;
    return 0;
}
"#,
        gen_input: |rng| {
            let n = rng.random_range(1..=8);
            format!("{n}\n{}\n", ints(rng, n, -99, 99))
        },
    },
    Challenge {
        name: "vowels",
        source: r#"#include <iostream>
#include <string>
using namespace std;

int main() {
    string s;
    cin >> s;
    int vow = 0, con = 0;
    for (int i = 0; i < s.size(); i++) {
        char c = s[i];
        if (c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u') {
            vow++;
        } else {
            con++;
        }
    }
    cout << vow << " " << con << endl;
    return 0;
}
"#,
        gen_input: |rng| {
            let len = rng.random_range(1..=12);
            format!("{}\n", word(rng, len))
        },
    },
];

/// Variable names used by the reference solutions, with two synonym stems each.
pub const ROLES: [(&str, &str); 25] = [
    ("n", "len"),
    ("i", "idx"),
    ("j", "k"),
    ("x", "val"),
    ("y", "other"),
    ("sum", "total"),
    ("cnt", "count"),
    ("d", "dv"),
    ("best", "mx"),
    ("cur", "run"),
    ("t", "tests"),
    ("q", "tc"),
    ("s", "str"),
    ("lo", "left"),
    ("hi", "right"),
    ("ok", "good"),
    ("a", "prev"),
    ("b", "nxt"),
    ("c", "ch"),
    ("r", "rem"),
    ("g", "common"),
    ("v", "arr"),
    ("vow", "vowels"),
    ("con", "cons"),
    ("m", "lim"),
];
