void mix4(double *a, double *b, int len)
{
    for (int j = 0; j+4-1 < len; j+=4)
    {
        a[j+0] = b[j+0];
        b[j+1] = 2.0 * a[j+1];
        a[j+2] = a[j+2] + 1.0;
        b[j+3] = 0.0;
    }
}
