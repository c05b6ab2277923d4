double pick(double ***b, int i, int j, int k)
{
    return b[i][j][k] + b[0][0][0];
}
