float rsum(const float *x, int n)
{
    float s = 0.0;
    for (int i = 0; i < n; ++i) {
        s = s + x[i];
    }
    return s;
}

int unrelated(int a, int b)
{
    return a + b;
}
